//! Job configuration: a TOML file with `[pde]`, `[modes]`, `[sim]` and
//! `[output]` tables, overridable from the command line.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use chks_core::classify::preset_by_name;
use chks_core::conslaw::{ModeSelector, WaveKind};
use chks_core::expr::rational::parse_rational;
use chks_core::expr::{parse_expr, parse_upoly, DiffExpr, Rational};
use chks_core::jet::PdeSpec;
use chks_core::numsim::{Boundary, Grid, Scheme, SolverConfig};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub pde: PdeSection,
    #[serde(default)]
    pub modes: ModesSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Either inline `a, b, f, g` or `preset` with `params`; `n` for both.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    pub a: Option<String>,
    pub b: Option<String>,
    pub f: Option<String>,
    pub g: Option<String>,
    pub n: Option<usize>,
    pub preset: Option<String>,
    pub params: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesSection {
    pub harmonic_degree: Option<u32>,
    pub max_k2: Option<u32>,
    pub poly_degree: Option<u32>,
    pub kind: Option<String>,
    /// `"1,1;0,1"` style list.
    pub wavevectors: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Length {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub points: Option<usize>,
    pub length: Option<Length>,
    pub boundary: Option<String>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub scheme: Option<String>,
    pub dealias: Option<bool>,
    pub blowup: Option<f64>,
    pub sample_every: Option<usize>,
    /// Initial condition in the expression grammar, a function of `x`.
    pub initial: Option<String>,
    /// Densities to monitor; defaults to every generated law that fits the
    /// grid, or `u` when there are none.
    pub densities: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Structured,
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn pde(&self) -> Result<PdeSpec, String> {
        let p = &self.pde;
        let n = p.n.unwrap_or(1);
        let inline = p.a.is_some() || p.b.is_some() || p.f.is_some() || p.g.is_some();
        match (&p.preset, inline) {
            (Some(_), true) => {
                Err("give either an inline equation (a, b, f, g) or a preset, not both".into())
            }
            (Some(name), false) => {
                let params = p.params.clone().unwrap_or_default();
                preset_by_name(name, &params, n).map_err(|e| e.to_string())
            }
            (None, true) => {
                let need = |v: &Option<String>, what: &str| {
                    v.clone()
                        .ok_or_else(|| format!("inline equation needs {what}"))
                };
                let a = need(&p.a, "a")?;
                let a = parse_rational(a.trim())
                    .ok_or_else(|| format!("a = {a:?} is not an exact rational"))?;
                let poly =
                    |name: &str, src: &str| parse_upoly(src).map_err(|e| format!("{name}: {e}"));
                let b = poly("b", &need(&p.b, "b")?)?;
                let g = poly("g", &need(&p.g, "g")?)?;
                let f = p.f.as_deref().map(|s| poly("f", s)).transpose()?;
                PdeSpec::new(a, b, f, g, n).map_err(|e| e.to_string())
            }
            (None, false) => Err("no equation given: use --config, --preset or --a/--b/--g".into()),
        }
    }

    pub fn selector(&self) -> Result<ModeSelector, String> {
        let m = &self.modes;
        let mut sel = ModeSelector::default();
        if let Some(d) = m.harmonic_degree {
            sel.harmonic_degree = d;
        }
        if let Some(k) = m.max_k2 {
            sel.max_k2 = k;
        }
        sel.poly_degree = m.poly_degree;
        sel.kind = match m.kind.as_deref() {
            None => None,
            Some("trig") => Some(WaveKind::Trig),
            Some("exp") | Some("exponential") => Some(WaveKind::Exponential),
            Some(other) => {
                return Err(format!("mode kind {other:?}, expected trig or exponential"))
            }
        };
        if let Some(w) = &m.wavevectors {
            sel.wavevectors = Some(parse_wavevectors(w)?);
        }
        Ok(sel)
    }

    pub fn grid(&self, n: usize) -> Result<Grid, String> {
        let s = &self.sim;
        let length = match &s.length {
            None => std::f64::consts::TAU,
            Some(Length::Number(v)) => *v,
            Some(Length::Text(t)) => parse_length(t)?,
        };
        let boundary = match s.boundary.as_deref() {
            None | Some("periodic") => Boundary::Periodic,
            Some("compact") | Some("compact-support") => Boundary::CompactSupport,
            Some(other) => {
                return Err(format!(
                    "boundary {other:?}, expected periodic or compact-support"
                ))
            }
        };
        let points = s.points.unwrap_or(if n == 1 { 128 } else { 64 });
        Grid::new(n, points, length, boundary).map_err(|e| e.to_string())
    }

    pub fn solver(&self) -> Result<SolverConfig, String> {
        let s = &self.sim;
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            dt: s.dt.unwrap_or(d.dt),
            t_end: s.t_end.unwrap_or(d.t_end),
            scheme: match &s.scheme {
                None => d.scheme,
                Some(name) => name.parse::<Scheme>().map_err(|e| e.to_string())?,
            },
            dealias: s.dealias.unwrap_or(d.dealias),
            blowup_bound: s.blowup.unwrap_or(d.blowup_bound),
            sample_every: s.sample_every.unwrap_or(d.sample_every),
        };
        cfg.steps().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn initial(&self, n: usize) -> Result<DiffExpr, String> {
        let default = if n == 1 {
            "1/10*cos(x1)"
        } else {
            "1/10*cos(x1)*cos(x2)"
        };
        let src = self.sim.initial.as_deref().unwrap_or(default);
        let e = parse_expr(src).map_err(|e| format!("initial: {e}"))?;
        if !e.is_coefficient_only() {
            return Err(format!("initial condition {src:?} must depend on x only"));
        }
        Ok(e)
    }

    pub fn densities(&self) -> Result<Option<Vec<DiffExpr>>, String> {
        self.sim
            .densities
            .as_ref()
            .map(|ds| {
                ds.iter()
                    .map(|d| parse_expr(d).map_err(|e| format!("density {d:?}: {e}")))
                    .collect()
            })
            .transpose()
    }

    pub fn format(&self) -> Result<Format, String> {
        match self.output.format.as_deref() {
            None | Some("text") => Ok(Format::Text),
            Some("structured") | Some("toml") => Ok(Format::Structured),
            Some(other) => Err(format!("format {other:?}, expected text or structured")),
        }
    }
}

/// `"1,1;0,1"` into rational vectors.
pub fn parse_wavevectors(src: &str) -> Result<Vec<Vec<Rational>>, String> {
    src.split(';')
        .map(|k| {
            k.split(',')
                .map(|c| {
                    parse_rational(c.trim())
                        .ok_or_else(|| format!("bad wavevector component {c:?} in {src:?}"))
                })
                .collect()
        })
        .collect()
}

/// `"8pi"`, `"8*pi"`, `"pi"` or a plain number.
fn parse_length(src: &str) -> Result<f64, String> {
    let s = src.trim();
    let bad = || format!("axis length {src:?}, expected a number or a multiple of pi");
    if let Some(head) = s.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let factor = if head.is_empty() {
            1.0
        } else {
            head.parse::<f64>().map_err(|_| bad())?
        };
        return Ok(factor * std::f64::consts::PI);
    }
    s.parse::<f64>().map_err(|_| bad())
}
