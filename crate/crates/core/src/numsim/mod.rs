//! Pseudo-spectral IMEX integration of the equation on periodic grids, with
//! monitoring of conserved functionals and solver self-consistency.

mod monitor;
mod solver;
mod spectral;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use monitor::{
    check_density, convergence_study, functional, manufactured_residual, monitor, observed_orders,
    LawDrift, MonitorTable, Monitored, SimSummary,
};
pub use solver::{step, Simulator};

use crate::expr::rational::to_f64;
use crate::expr::{DiffExpr, JetPoint, MultiIndex, UPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("field has {got} values, grid has {expected} cells")]
    FieldSize { expected: usize, got: usize },
    #[error("blow-up at t = {t}: max |u| = {max_abs:e} exceeds {bound:e}")]
    BlowUp { t: f64, max_abs: f64, bound: f64 },
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("density {0} must depend on t, x and u only")]
    Density(String),
    #[error("density {density} is not periodic on this grid: {reason}")]
    Incompatible { density: String, reason: String },
    #[error("initial data do not vanish near the boundary (max |u0| there = {0:e})")]
    Support(f64),
    #[error("expression {0} must be a function of t and x only")]
    NotCoefficient(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Periodic grid with data kept away from the boundary, so that
    /// non-periodic densities can be monitored.
    CompactSupport,
}

/// Uniform grid on `[0, L)^n`, `x1` fastest in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub points: usize,
    pub length: f64,
    pub boundary: Boundary,
}

impl Grid {
    pub fn new(n: usize, points: usize, length: f64, boundary: Boundary) -> Result<Self, SimError> {
        if !(1..=2).contains(&n) {
            return Err(SimError::Grid(format!(
                "dimension {n} not supported, use 1 or 2"
            )));
        }
        if points < 4 || !points.is_power_of_two() {
            return Err(SimError::Grid(format!(
                "{points} points per axis, need a power of two >= 4"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SimError::Grid(format!(
                "axis length {length} must be positive"
            )));
        }
        Ok(Grid {
            n,
            points,
            length,
            boundary,
        })
    }

    pub fn periodic(n: usize, points: usize) -> Result<Self, SimError> {
        Grid::new(n, points, std::f64::consts::TAU, Boundary::Periodic)
    }

    pub fn h(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn cells(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.n as i32)
    }

    /// Axis indices of cell `p`.
    pub fn index(&self, p: usize) -> [usize; 2] {
        [p % self.points, p / self.points]
    }

    pub fn coords(&self, p: usize) -> Vec<f64> {
        let idx = self.index(p);
        (0..self.n).map(|i| idx[i] as f64 * self.h()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
    pub t: f64,
}

impl Field {
    pub fn from_fn(grid: &Grid, t: f64, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.cells()).map(|p| f(&grid.coords(p))).collect();
        Field { values, t }
    }

    /// Samples a closed-form `u(t, x)`.
    pub fn from_expr(grid: &Grid, e: &DiffExpr, t: f64) -> Result<Self, SimError> {
        if !e.is_coefficient_only() {
            return Err(SimError::NotCoefficient(e.to_string()));
        }
        let no_jets = |_: &MultiIndex| 0.0;
        Ok(Field::from_fn(grid, t, |x| {
            e.eval(&JetPoint {
                t,
                x,
                u: 0.0,
                jets: &no_jets,
                ut: 0.0,
            })
        }))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    fn check(&self, grid: &Grid) -> Result<(), SimError> {
        if self.values.len() != grid.cells() {
            return Err(SimError::FieldSize {
                expected: grid.cells(),
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// First-order IMEX Euler, spectral.
    ImexEuler,
    /// Second-order semi-implicit BDF, spectral.
    Sbdf2,
    /// Forward Euler with centered differences; small grids only.
    ExplicitFd,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Sbdf2 => 2,
            _ => 1,
        }
    }
}

impl FromStr for Scheme {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "imex-euler" | "imex-spectral" | "imex" => Ok(Scheme::ImexEuler),
            "imex-sbdf2" | "sbdf2" => Ok(Scheme::Sbdf2),
            "explicit-fd" | "fd" => Ok(Scheme::ExplicitFd),
            other => Err(SimError::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::ImexEuler => "imex-euler",
            Scheme::Sbdf2 => "imex-sbdf2",
            Scheme::ExplicitFd => "explicit-fd",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// 2/3-rule truncation of the explicit terms.
    pub dealias: bool,
    pub blowup_bound: f64,
    /// Record every `sample_every` steps.
    pub sample_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::ImexEuler,
            dealias: true,
            blowup_bound: 1e6,
            sample_every: 1,
        }
    }
}

impl SolverConfig {
    /// Number of steps to reach `t_end`; it must be a whole multiple of `dt`.
    pub fn steps(&self) -> Result<usize, SimError> {
        if !(self.dt >= 0.0 && self.dt.is_finite()) {
            return Err(SimError::Config(format!(
                "dt = {} must be non-negative",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(SimError::Config(format!(
                "t_end = {} must be non-negative",
                self.t_end
            )));
        }
        if self.sample_every == 0 {
            return Err(SimError::Config("sample_every must be at least 1".into()));
        }
        if self.t_end == 0.0 {
            return Ok(0);
        }
        if self.dt == 0.0 {
            return Err(SimError::Config(
                "dt = 0 cannot reach a positive t_end".into(),
            ));
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(SimError::Config(format!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// `Σ c u^p e^{αu}` with floating-point coefficients.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FastPoly(Vec<(f64, i32, f64)>);

impl FastPoly {
    pub(crate) fn new(p: &UPoly) -> Self {
        FastPoly(
            p.terms()
                .map(|(k, c)| (to_f64(c), k.power as i32, to_f64(&k.exp_arg)))
                .collect(),
        )
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn eval(&self, u: f64) -> f64 {
        self.0
            .iter()
            .map(|&(c, p, a)| {
                let mut v = c * u.powi(p);
                if a != 0.0 {
                    v *= (a * u).exp();
                }
                v
            })
            .sum()
    }
}
