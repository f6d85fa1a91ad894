//! The four subcommands. Each returns its rendered report and an outcome
//! that decides the exit status.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use chks_core::classify::{classify, Classification};
use chks_core::conslaw::{conservation_laws, ConsLaw, LawReport};
use chks_core::expr::rational::fmt_rational;
use chks_core::expr::DiffExpr;
use chks_core::jet::PdeSpec;
use chks_core::numsim::{check_density, monitor, Field, Monitored, SimError};
use chks_core::suite::{self, SuiteResult};

use crate::config::{Format, JobConfig};

#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit 1.
    Usage(String),
    /// The solver exceeded its bound: exit 3.
    BlowUp(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::BlowUp(_) => 3,
        }
    }
}

/// Report text plus whether a verification check failed (exit 2).
pub struct Outcome {
    pub report: String,
    pub failed: bool,
}

fn render<T: Serialize>(
    format: Format,
    value: &T,
    text: impl FnOnce() -> String,
) -> Result<String, Failure> {
    match format {
        Format::Text => Ok(text()),
        Format::Structured => toml::to_string(value)
            .map_err(|e| Failure::Usage(format!("cannot serialize report: {e}"))),
    }
}

#[derive(Serialize)]
struct EquationOut {
    a: String,
    b: String,
    f: String,
    g: String,
    n: usize,
}

impl EquationOut {
    fn new(pde: &PdeSpec) -> Self {
        EquationOut {
            a: fmt_rational(&pde.a),
            b: pde.b.to_string(),
            f: pde.f.to_string(),
            g: pde.g.to_string(),
            n: pde.n,
        }
    }
}

fn equation_line(pde: &PdeSpec) -> String {
    format!(
        "u_t = {}*Δ²u + ({})*Δu + ({})*|∇u|² + ({})   (n = {})",
        fmt_rational(&pde.a),
        pde.b,
        pde.f,
        pde.g,
        pde.n
    )
}

fn classify_pde(pde: &PdeSpec) -> Result<Classification, Failure> {
    classify(pde).map_err(|e| Failure::Usage(e.to_string()))
}

#[derive(Serialize)]
struct WitnessOut {
    label: String,
    value: String,
}

#[derive(Serialize)]
struct ClassifyOut {
    equation: EquationOut,
    result: String,
    admits_laws: bool,
    classification: Classification,
}

fn witnesses(cls: &Classification) -> Vec<WitnessOut> {
    cls.witnesses
        .iter()
        .map(|w| WitnessOut {
            label: w.label.clone(),
            value: w.value.to_string(),
        })
        .collect()
}

fn write_witnesses(out: &mut String, cls: &Classification) {
    for w in &cls.witnesses {
        let _ = writeln!(out, "  {} = {}", w.label, w.value);
    }
}

pub fn cmd_classify(cfg: &JobConfig) -> Result<Outcome, Failure> {
    let pde = cfg.pde().map_err(Failure::Usage)?;
    let cls = classify_pde(&pde)?;
    let value = ClassifyOut {
        equation: EquationOut::new(&pde),
        result: cls.to_string(),
        admits_laws: cls.admits_laws(),
        classification: cls.clone(),
    };
    let report = render(cfg.format().map_err(Failure::Usage)?, &value, || {
        let mut s = format!("equation: {}\n{}\nwitnesses:\n", equation_line(&pde), cls);
        write_witnesses(&mut s, &cls);
        s
    })?;
    Ok(Outcome {
        report,
        failed: false,
    })
}

#[derive(Serialize)]
struct ConsLawsOut {
    equation: EquationOut,
    result: String,
    admits_laws: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    witness: Vec<WitnessOut>,
    verified: bool,
    law: Vec<LawReport>,
}

pub fn cmd_conslaws(cfg: &JobConfig) -> Result<Outcome, Failure> {
    let pde = cfg.pde().map_err(Failure::Usage)?;
    let sel = cfg.selector().map_err(Failure::Usage)?;
    let format = cfg.format().map_err(Failure::Usage)?;
    let cls = classify_pde(&pde)?;
    if !cls.admits_laws() {
        let value = ConsLawsOut {
            equation: EquationOut::new(&pde),
            result: cls.to_string(),
            admits_laws: false,
            witness: witnesses(&cls),
            verified: true,
            law: Vec::new(),
        };
        let report = render(format, &value, || {
            let mut s = format!(
                "equation: {}\n{}\nno nontrivial local conservation laws exist\nwitnesses:\n",
                equation_line(&pde),
                cls
            );
            write_witnesses(&mut s, &cls);
            s
        })?;
        return Ok(Outcome {
            report,
            failed: false,
        });
    }
    let laws = conservation_laws(&cls, &pde, &sel).map_err(|e| Failure::Usage(e.to_string()))?;
    let reports = laws
        .iter()
        .enumerate()
        .map(|(i, cl)| LawReport::new(i + 1, &cls, &pde, cl))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let all = reports.iter().all(|r| r.verified);
    let value = ConsLawsOut {
        equation: EquationOut::new(&pde),
        result: cls.to_string(),
        admits_laws: true,
        witness: Vec::new(),
        verified: all,
        law: reports,
    };
    let report = render(format, &value, || {
        let mut s = format!("equation: {}\n{}\n", equation_line(&pde), cls);
        for r in &value.law {
            let _ = writeln!(s, "\n{r}");
        }
        let bad = value.law.iter().filter(|r| !r.verified).count();
        let _ = writeln!(
            s,
            "\n{} laws, {}",
            value.law.len(),
            if bad == 0 {
                "all verified".to_string()
            } else {
                format!("{bad} failed verification")
            }
        );
        s
    })?;
    Ok(Outcome {
        report,
        failed: !all,
    })
}

#[derive(Serialize)]
struct VerifyOut {
    passed: bool,
    suite: Vec<SuiteResult>,
}

pub struct VerifyOptions {
    pub seed: u64,
    pub cases: usize,
    pub inject_sign_error: bool,
}

/// Negates the first flux component of the first law.
fn inject(groups: &mut [(PdeSpec, Vec<ConsLaw>)]) {
    if let Some(cl) = groups
        .iter_mut()
        .flat_map(|(_, laws)| laws.iter_mut())
        .next()
    {
        cl.x[0] = -cl.x[0].clone();
    }
}

pub fn cmd_verify(cfg: &JobConfig, opts: &VerifyOptions) -> Result<Outcome, Failure> {
    let (seed, cases) = (opts.seed, opts.cases);
    let mut results = vec![
        suite::ring_laws(seed, cases),
        suite::print_parse(seed.wrapping_add(1), cases),
        suite::derivative_laws(seed.wrapping_add(2), cases),
        suite::euler_annihilation(seed.wrapping_add(3), cases),
        suite::on_shell_consistency(seed.wrapping_add(4), cases),
    ];
    let configured = cfg.pde.preset.is_some()
        || cfg.pde.a.is_some()
        || cfg.pde.b.is_some()
        || cfg.pde.g.is_some();
    let mut groups = if configured {
        let pde = cfg.pde().map_err(Failure::Usage)?;
        let cls = classify_pde(&pde)?;
        let laws = if cls.admits_laws() {
            let sel = cfg.selector().map_err(Failure::Usage)?;
            conservation_laws(&cls, &pde, &sel).map_err(|e| Failure::Usage(e.to_string()))?
        } else {
            Vec::new()
        };
        vec![(pde, laws)]
    } else {
        suite::sample_laws()
    };
    if opts.inject_sign_error {
        inject(&mut groups);
    }
    results.push(suite::law_identities(&groups));
    let passed = results.iter().all(|r| r.passed());
    let value = VerifyOut {
        passed,
        suite: results,
    };
    let report = render(cfg.format().map_err(Failure::Usage)?, &value, || {
        let mut s = String::new();
        for r in &value.suite {
            let ok = r.cases - r.failures.len();
            let _ = writeln!(
                s,
                "{} {}: {}/{} checks passed",
                if r.passed() { "PASS" } else { "FAIL" },
                r.name,
                ok,
                r.cases
            );
            for w in &r.warnings {
                let _ = writeln!(s, "  warning: {w}");
            }
            for f in r.failures.iter().take(5) {
                let _ = writeln!(s, "  failure: {f}");
            }
        }
        let _ = writeln!(
            s,
            "{}",
            if passed {
                "all suites passed"
            } else {
                "verification failed"
            }
        );
        s
    })?;
    Ok(Outcome {
        report,
        failed: !passed,
    })
}

#[derive(Serialize)]
struct SimulateOut<'a> {
    equation: EquationOut,
    scheme: String,
    points: usize,
    dt: f64,
    t_end: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    skipped: Vec<String>,
    summary: &'a chks_core::numsim::SimSummary,
}

/// Densities to monitor, plus notes on generated laws left out because
/// they do not fit the grid.
fn select_densities(
    cfg: &JobConfig,
    pde: &PdeSpec,
    grid: &chks_core::numsim::Grid,
) -> Result<(Vec<Monitored>, Vec<String>), Failure> {
    if let Some(ds) = cfg.densities().map_err(Failure::Usage)? {
        let mut out = Vec::new();
        for (i, d) in ds.into_iter().enumerate() {
            check_density(&d, grid).map_err(|e| Failure::Usage(e.to_string()))?;
            let name = if d == DiffExpr::u() {
                "mass".to_string()
            } else {
                format!("T{}", i + 1)
            };
            out.push(Monitored::new(name, d));
        }
        return Ok((out, Vec::new()));
    }
    let cls = classify_pde(pde)?;
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    if cls.admits_laws() {
        let sel = cfg.selector().map_err(Failure::Usage)?;
        let laws = conservation_laws(&cls, pde, &sel).map_err(|e| Failure::Usage(e.to_string()))?;
        for (i, cl) in laws.iter().enumerate() {
            match check_density(&cl.t, grid) {
                Ok(()) => out.push(Monitored::from_law(format!("law{}", i + 1), cl)),
                Err(e) => skipped.push(format!("law{}: {e}", i + 1)),
            }
        }
    }
    if out.is_empty() {
        out.push(Monitored::mass());
    }
    Ok((out, skipped))
}

pub fn cmd_simulate(cfg: &JobConfig, out_dir: Option<&Path>) -> Result<Outcome, Failure> {
    let pde = cfg.pde().map_err(Failure::Usage)?;
    let format = cfg.format().map_err(Failure::Usage)?;
    let grid = cfg.grid(pde.n).map_err(Failure::Usage)?;
    let solver = cfg.solver().map_err(Failure::Usage)?;
    let u0 = cfg.initial(pde.n).map_err(Failure::Usage)?;
    let (laws, skipped) = select_densities(cfg, &pde, &grid)?;
    let field = Field::from_expr(&grid, &u0, 0.0).map_err(|e| Failure::Usage(e.to_string()))?;
    let table = match monitor(&pde, &laws, &field, &grid, &solver) {
        Ok(t) => t,
        Err(e @ (SimError::BlowUp { .. } | SimError::NonFinite { .. })) => {
            return Err(Failure::BlowUp(e.to_string()))
        }
        Err(e) => return Err(Failure::Usage(e.to_string())),
    };
    let summary = table.summary();
    let value = SimulateOut {
        equation: EquationOut::new(&pde),
        scheme: solver.scheme.to_string(),
        points: grid.points,
        dt: solver.dt,
        t_end: solver.t_end,
        skipped,
        summary: &summary,
    };
    let report = render(format, &value, || {
        let mut s = format!(
            "equation: {}\nscheme {}, {} points per axis, dt = {}, t_end = {}\n",
            equation_line(&pde),
            value.scheme,
            value.points,
            value.dt,
            value.t_end
        );
        for note in &value.skipped {
            let _ = writeln!(s, "skipped {note}");
        }
        for (law, m) in summary.laws.iter().zip(&laws) {
            let _ = writeln!(
                s,
                "{}: T = {}, initial {:.12e}, final {:.12e}, max relative drift {:.3e}",
                law.name, m.density, law.initial, law.final_value, law.max_relative_drift
            );
        }
        let _ = writeln!(
            s,
            "mass change {:.6e}, self-consistency residual {:.3e} (relative {:.3e})",
            summary.mass_change, summary.max_selfres, summary.selfres_relative
        );
        s
    })?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
        let p = dir.join("monitor.csv");
        std::fs::write(&p, table.to_csv())
            .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
    }
    Ok(Outcome {
        report,
        failed: false,
    })
}
