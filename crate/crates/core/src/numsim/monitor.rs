//! Conserved-functional monitoring, manufactured residuals and temporal
//! convergence studies.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::Zero;
use serde::Serialize;

use super::{Boundary, Field, Grid, SimError, Simulator, SolverConfig};
use crate::conslaw::ConsLaw;
use crate::expr::rational::to_f64;
use crate::expr::{Coeff, DiffExpr, JetPoint, MultiIndex};
use crate::jet::{partial_multi, rhs, PdeSpec};

/// `c t^m e^{μt} s(x) u^p e^{αu}` with `s` sampled on the grid.
struct Term {
    c: f64,
    t_power: i32,
    mu: f64,
    spatial: Vec<f64>,
    power: i32,
    alpha: f64,
}

struct Compiled {
    terms: Vec<Term>,
    volume: f64,
}

impl Compiled {
    fn new(t: &DiffExpr, grid: &Grid) -> Result<Self, SimError> {
        if t.has_jets() || t.has_ut() {
            return Err(SimError::Density(t.to_string()));
        }
        let terms = t
            .terms()
            .map(|(m, c)| {
                let spatial_coeff = Coeff {
                    t_power: 0,
                    exp_t: Zero::zero(),
                    x: m.coeff.x.clone(),
                };
                Term {
                    c: to_f64(c),
                    t_power: m.coeff.t_power as i32,
                    mu: to_f64(&m.coeff.exp_t),
                    spatial: (0..grid.cells())
                        .map(|p| spatial_coeff.eval(0.0, &grid.coords(p)))
                        .collect(),
                    power: m.u.power as i32,
                    alpha: to_f64(&m.u.exp_arg),
                }
            })
            .collect();
        Ok(Compiled {
            terms,
            volume: grid.cell_volume(),
        })
    }

    fn pointwise(&self, t: f64, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for term in &self.terms {
            let time = term.c * t.powi(term.t_power) * (term.mu * t).exp();
            for (o, (&s, &v)) in out.iter_mut().zip(term.spatial.iter().zip(u)) {
                let mut w = v.powi(term.power);
                if term.alpha != 0.0 {
                    w *= (term.alpha * v).exp();
                }
                *o += time * s * w;
            }
        }
        out
    }

    fn integral(&self, t: f64, u: &[f64]) -> f64 {
        self.pointwise(t, u).iter().sum::<f64>() * self.volume
    }

    fn abs_integral(&self, t: f64, u: &[f64]) -> f64 {
        self.pointwise(t, u).iter().map(|v| v.abs()).sum::<f64>() * self.volume
    }
}

/// `∫ T dx` by the rectangle rule, spectrally accurate for smooth periodic
/// integrands.
pub fn functional(t: &DiffExpr, field: &Field, grid: &Grid) -> Result<f64, SimError> {
    field.check(grid)?;
    Ok(Compiled::new(t, grid)?.integral(field.t, &field.values))
}

/// Checks up front that a density can be monitored on `grid`: it must be
/// a function of `t, x, u` and, on a periodic grid, periodic itself.
pub fn check_density(t: &DiffExpr, grid: &Grid) -> Result<(), SimError> {
    if t.has_jets() || t.has_ut() {
        return Err(SimError::Density(t.to_string()));
    }
    if grid.boundary == Boundary::Periodic {
        check_periodic(t, grid)?;
    }
    Ok(())
}

/// Rejects densities that are not periodic with the grid.
fn check_periodic(t: &DiffExpr, grid: &Grid) -> Result<(), SimError> {
    let fail = |reason: String| SimError::Incompatible {
        density: t.to_string(),
        reason,
    };
    for (m, _) in t.terms() {
        let Some(waves) = m.coeff.trig_wavenumbers() else {
            return Err(fail("polynomial or exponential dependence on x".into()));
        };
        for (i, k) in waves {
            let periods = to_f64(&k) * grid.length / std::f64::consts::TAU;
            if (periods - periods.round()).abs() > 1e-9 {
                return Err(fail(format!(
                    "wavenumber {k} along x{} does not fit axis length {}",
                    i + 1,
                    grid.length
                )));
            }
        }
    }
    Ok(())
}

/// Compact-support runs need data that vanish on the outer sixth of each axis.
fn check_support(u0: &Field, grid: &Grid) -> Result<(), SimError> {
    let band = grid.length / 6.0;
    let mut worst = 0.0f64;
    for p in 0..grid.cells() {
        let near = grid
            .coords(p)
            .iter()
            .any(|&x| x < band || x > grid.length - band);
        if near {
            worst = worst.max(u0.values[p].abs());
        }
    }
    if worst > 1e-10 * u0.max_abs().max(f64::MIN_POSITIVE) {
        return Err(SimError::Support(worst));
    }
    Ok(())
}

/// A density to track along the trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monitored {
    pub name: String,
    pub density: DiffExpr,
}

impl Monitored {
    pub fn new(name: impl Into<String>, density: DiffExpr) -> Self {
        Monitored {
            name: name.into(),
            density,
        }
    }

    pub fn from_law(name: impl Into<String>, law: &ConsLaw) -> Self {
        Monitored::new(name, law.t.clone())
    }

    pub fn mass() -> Self {
        Monitored::new("mass", DiffExpr::u())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorTable {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    /// `values[row][law]`.
    pub values: Vec<Vec<f64>>,
    /// `∫u dx` per row.
    pub mass: Vec<f64>,
    /// `∫rhs dx` per row.
    pub rhs_integral: Vec<f64>,
    /// `|d/dt ∫u dx - ∫rhs dx|` per row, the time derivative by finite
    /// differences of the sampled mass.
    pub selfres: Vec<f64>,
    /// Drift denominators `max(|I(0)|, ∫|T(u0)| dx)`.
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawDrift {
    pub name: String,
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_value: f64,
    pub max_relative_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub laws: Vec<LawDrift>,
    pub max_selfres: f64,
    /// `max selfres / max |∫rhs dx|`.
    pub selfres_relative: f64,
    pub mass_change: f64,
}

impl MonitorTable {
    fn finish(&mut self) {
        let m = self.mass.len();
        self.selfres = (0..m)
            .map(|i| {
                if m < 2 {
                    return 0.0;
                }
                let (lo, hi) = match i {
                    0 => (0, 1),
                    i if i == m - 1 => (m - 2, m - 1),
                    i => (i - 1, i + 1),
                };
                let rate = (self.mass[hi] - self.mass[lo]) / (self.times[hi] - self.times[lo]);
                (rate - self.rhs_integral[i]).abs()
            })
            .collect();
    }

    pub fn relative_drift(&self, law: usize) -> Vec<f64> {
        let i0 = self.values[0][law];
        self.values
            .iter()
            .map(|row| (row[law] - i0).abs() / self.scales[law])
            .collect()
    }

    pub fn summary(&self) -> SimSummary {
        let laws = self
            .names
            .iter()
            .enumerate()
            .map(|(j, name)| LawDrift {
                name: name.clone(),
                initial: self.values[0][j],
                final_value: self.values[self.values.len() - 1][j],
                max_relative_drift: self.relative_drift(j).into_iter().fold(0.0, f64::max),
            })
            .collect();
        let max_selfres = self.selfres.iter().copied().fold(0.0, f64::max);
        let rhs_scale = self
            .rhs_integral
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        SimSummary {
            laws,
            max_selfres,
            selfres_relative: if rhs_scale > 1e-10 {
                max_selfres / rhs_scale
            } else {
                max_selfres
            },
            mass_change: self.mass[self.mass.len() - 1] - self.mass[0],
        }
    }

    /// `t,<law_1>,...,<law_m>,selfres` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for name in &self.names {
            out.push(',');
            out.push_str(name);
        }
        out.push_str(",selfres\n");
        for (i, row) in self.values.iter().enumerate() {
            let _ = write!(out, "{:.16e}", self.times[i]);
            for v in row {
                let _ = write!(out, ",{v:.16e}");
            }
            let _ = writeln!(out, ",{:.16e}", self.selfres[i]);
        }
        out
    }
}

/// Runs the solver from `u0` and records every density, `∫u` and `∫rhs`.
pub fn monitor(
    pde: &PdeSpec,
    laws: &[Monitored],
    u0: &Field,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<MonitorTable, SimError> {
    u0.check(grid)?;
    let compiled: Vec<Compiled> = laws
        .iter()
        .map(|l| {
            check_density(&l.density, grid)?;
            Compiled::new(&l.density, grid)
        })
        .collect::<Result<_, _>>()?;
    if grid.boundary == Boundary::CompactSupport {
        check_support(u0, grid)?;
    }
    let steps = cfg.steps()?;
    let mass = Compiled::new(&DiffExpr::u(), grid)?;
    let mut sim = Simulator::new(pde, grid, cfg, u0.clone())?;
    let mut table = MonitorTable {
        names: laws.iter().map(|l| l.name.clone()).collect(),
        times: Vec::new(),
        values: Vec::new(),
        mass: Vec::new(),
        rhs_integral: Vec::new(),
        selfres: Vec::new(),
        scales: compiled
            .iter()
            .map(|c| {
                let i0 = c.integral(u0.t, &u0.values).abs();
                i0.max(c.abs_integral(u0.t, &u0.values))
                    .max(f64::MIN_POSITIVE)
            })
            .collect(),
    };
    let volume = grid.cell_volume();
    let record = |sim: &Simulator, table: &mut MonitorTable| {
        let f = sim.field();
        table.times.push(f.t);
        table.values.push(
            compiled
                .iter()
                .map(|c| c.integral(f.t, &f.values))
                .collect(),
        );
        table.mass.push(mass.integral(f.t, &f.values));
        table
            .rhs_integral
            .push(sim.rhs_values(&f.values).iter().sum::<f64>() * volume);
    };
    record(&sim, &mut table);
    for s in 1..=steps {
        sim.step()?;
        if s % cfg.sample_every == 0 || s == steps {
            record(&sim, &mut table);
        }
    }
    table.finish();
    Ok(table)
}

/// `max_x |u*_t - rhs(u*)|` on the grid at time `t`, derivatives of `u*`
/// taken symbolically.
pub fn manufactured_residual(
    pde: &PdeSpec,
    u_star: &DiffExpr,
    grid: &Grid,
    t: f64,
) -> Result<f64, SimError> {
    if !u_star.is_coefficient_only() {
        return Err(SimError::NotCoefficient(u_star.to_string()));
    }
    let r = rhs(pde);
    let derivs: BTreeMap<MultiIndex, DiffExpr> = r
        .jet_indices()
        .into_iter()
        .map(|j| (j.clone(), partial_multi(u_star, &j)))
        .collect();
    let ut = u_star.partial_t();
    let zero = |_: &MultiIndex| 0.0;
    let mut worst = 0.0f64;
    for p in 0..grid.cells() {
        let x = grid.coords(p);
        let at = |e: &DiffExpr| {
            e.eval(&JetPoint {
                t,
                x: &x,
                u: 0.0,
                jets: &zero,
                ut: 0.0,
            })
        };
        let values: BTreeMap<&MultiIndex, f64> = derivs.iter().map(|(j, e)| (j, at(e))).collect();
        let jets = |j: &MultiIndex| values[j];
        let point = JetPoint {
            t,
            x: &x,
            u: at(u_star),
            jets: &jets,
            ut: 0.0,
        };
        worst = worst.max((at(&ut) - r.eval(&point)).abs());
    }
    Ok(worst)
}

/// Max-norm error at `t_end` against a closed-form solution, per `dt`.
pub fn convergence_study(
    pde: &PdeSpec,
    exact: &DiffExpr,
    grid: &Grid,
    cfg: &SolverConfig,
    dts: &[f64],
) -> Result<Vec<(f64, f64)>, SimError> {
    let target = Field::from_expr(grid, exact, cfg.t_end)?;
    dts.iter()
        .map(|&dt| {
            let cfg = SolverConfig { dt, ..cfg.clone() };
            let steps = cfg.steps()?;
            let mut sim = Simulator::new(pde, grid, &cfg, Field::from_expr(grid, exact, 0.0)?)?;
            for _ in 0..steps {
                sim.step()?;
            }
            let err = sim
                .field()
                .values
                .iter()
                .zip(&target.values)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            Ok((dt, err))
        })
        .collect()
}

/// `log(e_i / e_{i+1}) / log(dt_i / dt_{i+1})` for consecutive pairs.
pub fn observed_orders(study: &[(f64, f64)]) -> Vec<f64> {
    study
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect()
}
