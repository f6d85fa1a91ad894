//! Time stepping: IMEX Euler and SBDF2 in Fourier space, plus an explicit
//! finite-difference cross-check.

use rustfft::num_complex::Complex64;

use super::spectral::Spectral;
use super::{FastPoly, Field, Grid, Scheme, SimError, SolverConfig};
use crate::expr::rational::to_f64;
use crate::jet::PdeSpec;

/// Integrates `u_t = aΔ²u + b(u)Δu + f(u)|∇u|² + g(u)`.
///
/// The spectral schemes treat `(aΔ² + b(0)Δ)` implicitly and write the rest
/// as `Δ(B(u) - b(0)u) + (f - b')(u)|∇u|² + g(u)` with `B' = b`, so that
/// divergence-form terms leave the mean untouched up to round-off. With
/// dealiasing on, both the explicit terms and the new state are truncated
/// to the 2/3 band; otherwise round-off in the unresolved modes grows
/// without bound when `a > 0`.
pub struct Simulator {
    grid: Grid,
    cfg: SolverConfig,
    spec: Spectral,
    a: f64,
    lin: Vec<f64>,
    shift: FastPoly,
    grad: FastPoly,
    b: FastPoly,
    f: FastPoly,
    g: FastPoly,
    history: Option<(Vec<Complex64>, Vec<Complex64>)>,
    field: Field,
}

impl Simulator {
    pub fn new(
        pde: &PdeSpec,
        grid: &Grid,
        cfg: &SolverConfig,
        u0: Field,
    ) -> Result<Self, SimError> {
        if pde.n != grid.n {
            return Err(SimError::Grid(format!(
                "equation has n = {}, grid has n = {}",
                pde.n, grid.n
            )));
        }
        u0.check(grid)?;
        cfg.steps()?;
        let spec = Spectral::new(grid);
        let a = to_f64(&pde.a);
        let b0 = pde.b.eval_at_zero();
        let b0f = to_f64(&b0);
        let lin = (0..spec.len())
            .map(|p| {
                let k2 = spec.k2(p);
                a * k2 * k2 - b0f * k2
            })
            .collect();
        let shift = &pde.b.antiderivative()
            - &(&crate::expr::UPoly::u() * &crate::expr::UPoly::constant(b0));
        let grad = &pde.f - &pde.b.derivative();
        Ok(Simulator {
            grid: grid.clone(),
            cfg: cfg.clone(),
            spec,
            a,
            lin,
            shift: FastPoly::new(&shift),
            grad: FastPoly::new(&grad),
            b: FastPoly::new(&pde.b),
            f: FastPoly::new(&pde.f),
            g: FastPoly::new(&pde.g),
            history: None,
            field: u0,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Fourier transform of the explicit terms.
    fn explicit_hat(&self, u: &[f64], u_hat: &[Complex64]) -> Vec<Complex64> {
        let mut phys: Vec<f64> = u.iter().map(|&v| self.g.eval(v)).collect();
        if !self.grad.is_zero() {
            let sq = self.grad_squared(u_hat);
            for ((p, &v), s) in phys.iter_mut().zip(u).zip(sq) {
                *p += self.grad.eval(v) * s;
            }
        }
        let mut out = self.spec.forward(&phys);
        if !self.shift.is_zero() {
            let w: Vec<f64> = u.iter().map(|&v| self.shift.eval(v)).collect();
            let w_hat = self.spec.forward(&w);
            for (p, (o, wh)) in out.iter_mut().zip(w_hat).enumerate() {
                *o -= wh * self.spec.k2(p);
            }
        }
        if self.cfg.dealias {
            self.spec.truncate(&mut out);
        }
        out
    }

    fn grad_squared(&self, u_hat: &[Complex64]) -> Vec<f64> {
        let mut sq = vec![0.0; u_hat.len()];
        for i in 0..self.grid.n {
            let mut orders = [0u32; 2];
            orders[i] = 1;
            for (s, d) in sq
                .iter_mut()
                .zip(self.spec.derivative(u_hat, &orders[..self.grid.n]))
            {
                *s += d * d;
            }
        }
        sq
    }

    /// Pointwise right-hand side with the derivatives of the active scheme.
    pub fn rhs_values(&self, u: &[f64]) -> Vec<f64> {
        let (lap, bilap, grad2) = match self.cfg.scheme {
            Scheme::ExplicitFd => {
                let fd = Fd::new(&self.grid);
                let lap = fd.laplacian(u);
                let bilap = fd.laplacian(&lap);
                (lap, bilap, fd.grad_squared(u))
            }
            _ => {
                let hat = self.spec.forward(u);
                let scaled = |pow: i32| -> Vec<f64> {
                    let h: Vec<Complex64> = hat
                        .iter()
                        .enumerate()
                        .map(|(p, &v)| v * (-self.spec.k2(p)).powi(pow))
                        .collect();
                    self.spec.inverse(&h)
                };
                (scaled(1), scaled(2), self.grad_squared(&hat))
            }
        };
        (0..u.len())
            .map(|p| {
                let v = u[p];
                self.a * bilap[p]
                    + self.b.eval(v) * lap[p]
                    + self.f.eval(v) * grad2[p]
                    + self.g.eval(v)
            })
            .collect()
    }

    /// Advances the field by one `dt`.
    pub fn step(&mut self) -> Result<(), SimError> {
        let dt = self.cfg.dt;
        if dt == 0.0 {
            return Ok(());
        }
        let u = &self.field.values;
        let next = match self.cfg.scheme {
            Scheme::ExplicitFd => {
                let r = self.rhs_values(u);
                u.iter().zip(r).map(|(v, r)| v + dt * r).collect()
            }
            scheme => {
                let u_hat = self.spec.forward(u);
                let n_hat = self.explicit_hat(u, &u_hat);
                let new_hat: Vec<Complex64> = match (&self.history, scheme) {
                    (Some((u_prev, n_prev)), Scheme::Sbdf2) => (0..u_hat.len())
                        .map(|p| {
                            let num = u_hat[p] * 4.0 - u_prev[p]
                                + (n_hat[p] * 2.0 - n_prev[p]) * (2.0 * dt);
                            num / (3.0 - 2.0 * dt * self.lin[p])
                        })
                        .collect(),
                    _ => (0..u_hat.len())
                        .map(|p| (u_hat[p] + n_hat[p] * dt) / (1.0 - dt * self.lin[p]))
                        .collect(),
                };
                let mut new_hat = new_hat;
                if self.cfg.dealias {
                    self.spec.truncate(&mut new_hat);
                }
                if scheme == Scheme::Sbdf2 {
                    self.history = Some((u_hat, n_hat));
                }
                self.spec.inverse(&new_hat)
            }
        };
        self.field = Field {
            values: next,
            t: self.field.t + dt,
        };
        self.check_finite()
    }

    fn check_finite(&self) -> Result<(), SimError> {
        let t = self.field.t;
        if self.field.values.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite { t });
        }
        let max_abs = self.field.max_abs();
        if max_abs > self.cfg.blowup_bound {
            return Err(SimError::BlowUp {
                t,
                max_abs,
                bound: self.cfg.blowup_bound,
            });
        }
        Ok(())
    }
}

/// Centered stencils on the periodic grid.
struct Fd<'a> {
    grid: &'a Grid,
}

impl<'a> Fd<'a> {
    fn new(grid: &'a Grid) -> Self {
        Fd { grid }
    }

    fn shifted(&self, p: usize, axis: usize, s: isize) -> usize {
        let n = self.grid.points as isize;
        let mut idx = self.grid.index(p);
        idx[axis] = (idx[axis] as isize + s).rem_euclid(n) as usize;
        idx[0] + self.grid.points * idx[1]
    }

    fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let h2 = self.grid.h().powi(2);
        (0..u.len())
            .map(|p| {
                (0..self.grid.n)
                    .map(|i| {
                        (u[self.shifted(p, i, 1)] - 2.0 * u[p] + u[self.shifted(p, i, -1)]) / h2
                    })
                    .sum()
            })
            .collect()
    }

    fn grad_squared(&self, u: &[f64]) -> Vec<f64> {
        let h = self.grid.h();
        (0..u.len())
            .map(|p| {
                (0..self.grid.n)
                    .map(|i| {
                        ((u[self.shifted(p, i, 1)] - u[self.shifted(p, i, -1)]) / (2.0 * h)).powi(2)
                    })
                    .sum()
            })
            .collect()
    }
}

/// One step from `field`; `dt = 0` returns the field unchanged.
pub fn step(
    field: &Field,
    pde: &PdeSpec,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<Field, SimError> {
    let mut cfg = cfg.clone();
    cfg.t_end = cfg.dt;
    let mut sim = Simulator::new(pde, grid, &cfg, field.clone())?;
    sim.step()?;
    Ok(sim.field)
}
