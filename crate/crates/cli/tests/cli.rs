use std::path::Path;
use std::process::{Command, Output};

fn chks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chks"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const CASE_III: &str = r#"
[pde]
a = "1"
b = "u + 1"
g = "u^2"
n = 2

[modes]
wavevectors = "1,1"

[sim]
points = 8
dt = 1e-4
t_end = 0.02
scheme = "imex-sbdf2"
sample_every = 50
"#;

#[test]
fn classify_reports() {
    let o = chks(&["classify", "--preset", "kuramoto-sivashinsky", "--dim", "2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("NoCL: condition 1 (f ≠ ∂b/∂u)"));
    assert!(stdout(&o).contains("f - db/du = -1/2"));

    let o = chks(&[
        "classify",
        "--preset",
        "cahn-hilliard",
        "--params",
        "1,1",
        "--dim",
        "2",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("Case II, c₂=0, c₃=0"));

    let o = chks(&[
        "classify", "--a", "1", "--b", "u + 1", "--g", "u^2", "--dim", "2",
    ]);
    assert!(stdout(&o).contains("Case III, c₄=2, c₅=1"));
}

#[test]
fn structured_classification_is_toml() {
    let o = chks(&[
        "classify",
        "--preset",
        "ch",
        "--params",
        "1,1",
        "--format",
        "structured",
    ]);
    assert_eq!(code(&o), 0);
    let v: toml::Value = toml::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"].as_str(), Some("Case II, c₂=0, c₃=0"));
    assert_eq!(
        v["classification"]["variant"]["variant"].as_str(),
        Some("CaseII")
    );
    assert_eq!(v["equation"]["b"].as_str(), Some("3*u^2 - 1"));
}

#[test]
fn conslaws_verified() {
    let o = chks(&[
        "conslaws",
        "--preset",
        "ch",
        "--params",
        "1,1",
        "--dim",
        "2",
        "--max-degree",
        "1",
    ]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert_eq!(s.matches("verified: yes").count(), 3);
    assert!(s.contains("T  = x1*u"));
    assert!(s.contains("3 laws, all verified"));

    let case_iii = [
        "conslaws", "--a", "1", "--b", "u + 1", "--g", "u^2", "--dim", "2", "--modes",
    ];
    let o = chks(&[&case_iii[..], &["1,1;1,-1"]].concat());
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("Q  = exp(-2*t)*cos(x1)*cos(x2)"));
    assert!(!s.contains("verified: no"));
    // |k|² must equal c₄ = 2
    let o = chks(&[&case_iii[..], &["1,1;0,1"]].concat());
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("wavevector (0,1) has |k|² = 1, need 2"));
}

#[test]
fn conslaws_structured_lists_laws() {
    let o = chks(&[
        "conslaws",
        "--preset",
        "ch",
        "--params",
        "1,1",
        "--max-degree",
        "2",
        "--format",
        "structured",
    ]);
    let v: toml::Value = toml::from_str(&stdout(&o)).unwrap();
    let laws = v["law"].as_array().unwrap();
    // harmonic polynomials in one dimension stop at degree 1
    assert_eq!(laws.len(), 2);
    assert!(laws.iter().all(|l| l["verified"].as_bool() == Some(true)));
    assert_eq!(v["verified"].as_bool(), Some(true));
}

#[test]
fn nonexistence_statement() {
    let o = chks(&["conslaws", "--preset", "ks"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("NoCL: condition 1"));
    assert!(s.contains("no nontrivial local conservation laws exist"));
    assert!(s.contains("f - db/du = -1/2"));
}

#[test]
fn verify_passes_and_catches_injected_error() {
    let o = chks(&["verify", "--cases", "10"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("all suites passed"));

    let o = chks(&["verify", "--cases", "5", "--inject-sign-error"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("FAIL conservation-law identities"));
}

#[test]
fn verify_without_laws_is_vacuous() {
    let o = chks(&["verify", "--cases", "3", "--preset", "ks"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("warning: no conservation laws to verify"));
}

#[test]
fn simulate_writes_csv_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "job.toml", CASE_III);
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    let o1 = chks(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out1.to_str().unwrap(),
    ]);
    let o2 = chks(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out2.to_str().unwrap(),
    ]);
    assert_eq!(code(&o1), 0, "{}", stderr(&o1));
    assert_eq!(stdout(&o1), stdout(&o2));
    let csv1 = std::fs::read_to_string(out1.join("monitor.csv")).unwrap();
    let csv2 = std::fs::read_to_string(out2.join("monitor.csv")).unwrap();
    assert_eq!(csv1, csv2);
    let mut lines = csv1.lines();
    assert_eq!(lines.next(), Some("t,law1,law2,law3,law4,selfres"));
    assert_eq!(lines.count(), 5);
    assert!(out1.join("summary.txt").exists());
    assert!(stdout(&o1).contains("max relative drift"));
}

#[test]
fn simulate_blowup_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let body = CASE_III.replace("points = 8", "points = 64");
    let cfg = write(dir.path(), "job.toml", &body);
    let o = chks(&["simulate", "--config", &cfg]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("blow-up"));
}

#[test]
fn incompatible_density_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "job.toml",
        "[sim]\ndensities = [\"cos(1/2*x1)*u\"]\n",
    );
    let o = chks(&["simulate", "--config", &cfg, "--preset", "ks"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("not periodic"));
}

#[test]
fn cli_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "job.toml", CASE_III);
    let o = chks(&["classify", "--config", &cfg, "--preset", "ks"]);
    assert!(stdout(&o).contains("NoCL: condition 1"));
    let o = chks(&["classify", "--config", &cfg, "--dim", "3"]);
    assert!(stdout(&o).contains("(n = 3)"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["classify"],
        vec!["classify", "--preset", "nope"],
        vec!["classify", "--preset", "ch", "--params", "1"],
        vec!["classify", "--a", "0.5", "--b", "1", "--g", "0"],
        vec!["classify", "--a", "0", "--b", "1", "--g", "0"],
        vec!["classify", "--preset", "ks", "--format", "xml"],
        vec!["conslaws", "--preset", "ks", "--modes", "1,x"],
        vec!["frobnicate"],
    ] {
        assert_eq!(code(&chks(&args)), 1, "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[pde]\nunknown = 1\n");
    assert_eq!(code(&chks(&["classify", "--config", &bad])), 1);
    let missing = dir.path().join("missing.toml");
    assert_eq!(
        code(&chks(&["classify", "--config", missing.to_str().unwrap()])),
        1
    );
}
