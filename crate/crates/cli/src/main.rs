//! `chks`: classify fourth-order parabolic equations, construct and check
//! their conservation laws, and monitor them along numerical solutions.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, Outcome, VerifyOptions};
use config::{parse_wavevectors, JobConfig};

#[derive(Parser)]
#[command(
    name = "chks",
    version,
    about = "Conservation laws of u_t = aΔ²u + b(u)Δu + f(u)|∇u|² + g(u)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide which case the equation falls into.
    Classify(Common),
    /// Construct and verify conservation laws.
    Conslaws(Common),
    /// Run the randomized identity suites.
    Verify(VerifyArgs),
    /// Solve numerically and monitor conserved functionals.
    Simulate(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML job file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// cahn-hilliard, kuramoto-sivashinsky or generalized-ch.
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated preset parameters.
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    /// Inline fourth-order coefficient (exact rational).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// Defaults to db/du.
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    /// Spatial dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Largest harmonic degree in Case II.
    #[arg(long)]
    max_degree: Option<u32>,
    /// Wavevectors, e.g. "1,1;0,1".
    #[arg(long, allow_hyphen_values = true)]
    modes: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// text or structured.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random cases per suite.
    #[arg(long, default_value_t = 100)]
    cases: usize,
    #[arg(long, hide = true)]
    inject_sign_error: bool,
}

impl Common {
    /// Loads the job file and applies the command-line overrides.
    fn job(&self) -> Result<JobConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => JobConfig::load(p).map_err(Failure::Usage)?,
            None => JobConfig::default(),
        };
        let inline = self.a.is_some() || self.b.is_some() || self.f.is_some() || self.g.is_some();
        if self.preset.is_some() && inline {
            return Err(Failure::Usage(
                "give either --preset or --a/--b/--f/--g, not both".into(),
            ));
        }
        if let Some(name) = &self.preset {
            cfg.pde.preset = Some(name.clone());
            cfg.pde.a = None;
            cfg.pde.b = None;
            cfg.pde.f = None;
            cfg.pde.g = None;
        }
        if inline {
            cfg.pde.preset = None;
            cfg.pde.params = None;
            cfg.pde.a = self.a.clone();
            cfg.pde.b = self.b.clone();
            cfg.pde.f = self.f.clone();
            cfg.pde.g = self.g.clone();
        }
        if let Some(p) = &self.params {
            cfg.pde.params = Some(
                p.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect(),
            );
        }
        if let Some(n) = self.dim {
            cfg.pde.n = Some(n);
        }
        if let Some(d) = self.max_degree {
            cfg.modes.harmonic_degree = Some(d);
        }
        if let Some(m) = &self.modes {
            parse_wavevectors(m).map_err(Failure::Usage)?;
            cfg.modes.wavevectors = Some(m.clone());
        }
        if let Some(f) = &self.format {
            cfg.output.format = Some(f.clone());
        }
        if let Some(o) = &self.out {
            cfg.output.dir = Some(o.clone());
        }
        cfg.format().map_err(Failure::Usage)?;
        Ok(cfg)
    }
}

fn write_report(dir: &Path, name: &str, cfg: &JobConfig, body: &str) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let ext = match cfg.format() {
        Ok(config::Format::Structured) => "toml",
        _ => "txt",
    };
    let p = dir.join(format!("{name}.{ext}"));
    std::fs::write(&p, body).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let (name, cfg, outcome) = match cli.command {
        Command::Classify(c) => {
            let cfg = c.job()?;
            ("classify", cfg.clone(), commands::cmd_classify(&cfg)?)
        }
        Command::Conslaws(c) => {
            let cfg = c.job()?;
            ("conslaws", cfg.clone(), commands::cmd_conslaws(&cfg)?)
        }
        Command::Verify(v) => {
            let cfg = v.common.job()?;
            let opts = VerifyOptions {
                seed: v.seed,
                cases: v.cases,
                inject_sign_error: v.inject_sign_error,
            };
            ("verify", cfg.clone(), commands::cmd_verify(&cfg, &opts)?)
        }
        Command::Simulate(c) => {
            let cfg = c.job()?;
            let out = commands::cmd_simulate(&cfg, cfg.output.dir.as_deref())?;
            ("summary", cfg, out)
        }
    };
    if let Some(dir) = &cfg.output.dir {
        write_report(dir, name, &cfg, &outcome.report)?;
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.report);
            if out.failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => {
            let msg = match &f {
                Failure::Usage(m) => format!("error: {m}"),
                Failure::BlowUp(m) => format!("blow-up: {m}"),
            };
            eprintln!("{msg}");
            ExitCode::from(f.code() as u8)
        }
    }
}
