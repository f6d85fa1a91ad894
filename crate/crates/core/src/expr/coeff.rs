//! Coefficient functions of the independent variables `t, x_1..x_n`.
//!
//! A [`Coeff`] is a product of atoms: `t^m`, `exp(mu*t)` and, per
//! coordinate, `x_i^m` times at most one of `sin(k x_i)`, `cos(k x_i)`,
//! `exp(k x_i)`. The class is closed under every partial derivative.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::rational::{factorial, int, to_f64, Rational};
use super::upoly::linear_arg;
use super::ExprError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrigKind {
    Cos,
    Sin,
}

/// Oscillatory or exponential factor along one coordinate. The wavenumber
/// is never zero and trig wavenumbers are positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Wave {
    Trig(TrigKind, Rational),
    Exp(Rational),
}

/// One atom of the coefficient class, used for construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoeffAtom {
    TPower(u32),
    XPower(usize, u32),
    ExpT(Rational),
    Trig(usize, TrigKind, Rational),
    ExpX(usize, Rational),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct XFactor {
    pub power: u32,
    pub wave: Option<Wave>,
}

impl XFactor {
    fn is_unit(&self) -> bool {
        self.power == 0 && self.wave.is_none()
    }

    fn mul(&self, other: &XFactor, coord: usize) -> Result<XFactor, ExprError> {
        let wave = match (&self.wave, &other.wave) {
            (None, w) | (w, None) => w.clone(),
            (Some(Wave::Exp(a)), Some(Wave::Exp(b))) => {
                let k = a + b;
                (!k.is_zero()).then_some(Wave::Exp(k))
            }
            _ => return Err(ExprError::Closure { coord }),
        };
        Ok(XFactor {
            power: self.power + other.power,
            wave,
        })
    }

    fn derivative(&self) -> Vec<(Rational, XFactor)> {
        let mut out = Vec::with_capacity(2);
        if self.power > 0 {
            out.push((
                int(self.power as i64),
                XFactor {
                    power: self.power - 1,
                    wave: self.wave.clone(),
                },
            ));
        }
        match &self.wave {
            None => {}
            Some(Wave::Trig(TrigKind::Sin, k)) => out.push((
                k.clone(),
                XFactor {
                    power: self.power,
                    wave: Some(Wave::Trig(TrigKind::Cos, k.clone())),
                },
            )),
            Some(Wave::Trig(TrigKind::Cos, k)) => out.push((
                -k,
                XFactor {
                    power: self.power,
                    wave: Some(Wave::Trig(TrigKind::Sin, k.clone())),
                },
            )),
            Some(Wave::Exp(k)) => out.push((k.clone(), self.clone())),
        }
        out
    }

    /// Some antiderivative in this coordinate.
    fn antiderivative(&self) -> Vec<(Rational, XFactor)> {
        let m = self.power;
        match &self.wave {
            None => vec![(
                Rational::one() / int(m as i64 + 1),
                XFactor {
                    power: m + 1,
                    wave: None,
                },
            )],
            Some(Wave::Exp(k)) => {
                let mut out = Vec::new();
                let mut kpow = k.clone();
                for j in 0..=m {
                    let sign = if j % 2 == 0 { int(1) } else { int(-1) };
                    let c = sign * factorial(m) / factorial(m - j) / &kpow;
                    out.push((
                        c,
                        XFactor {
                            power: m - j,
                            wave: self.wave.clone(),
                        },
                    ));
                    kpow *= k;
                }
                out
            }
            Some(Wave::Trig(kind, k)) => {
                // int x^m sin = -x^m cos/k + (m/k) int x^(m-1) cos
                // int x^m cos =  x^m sin/k - (m/k) int x^(m-1) sin
                let (lead_sign, other) = match kind {
                    TrigKind::Sin => (int(-1), TrigKind::Cos),
                    TrigKind::Cos => (int(1), TrigKind::Sin),
                };
                let mut out = vec![(
                    lead_sign.clone() / k,
                    XFactor {
                        power: m,
                        wave: Some(Wave::Trig(other, k.clone())),
                    },
                )];
                if m > 0 {
                    let rest = XFactor {
                        power: m - 1,
                        wave: Some(Wave::Trig(other, k.clone())),
                    }
                    .antiderivative();
                    let factor = -lead_sign * int(m as i64) / k;
                    out.extend(rest.into_iter().map(|(c, f)| (c * &factor, f)));
                }
                out
            }
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let mut v = x.powi(self.power as i32);
        match &self.wave {
            None => {}
            Some(Wave::Trig(TrigKind::Sin, k)) => v *= (to_f64(k) * x).sin(),
            Some(Wave::Trig(TrigKind::Cos, k)) => v *= (to_f64(k) * x).cos(),
            Some(Wave::Exp(k)) => v *= (to_f64(k) * x).exp(),
        }
        v
    }
}

/// Normalized product of coefficient atoms. Coordinates are zero-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coeff {
    pub t_power: u32,
    pub exp_t: Rational,
    pub x: BTreeMap<usize, XFactor>,
}

impl Coeff {
    pub fn unit() -> Self {
        Coeff::default()
    }

    pub fn is_unit(&self) -> bool {
        self.t_power == 0 && self.exp_t.is_zero() && self.x.is_empty()
    }

    /// Normalizes one atom. `None` means the atom is identically zero
    /// (`sin(0*x)`); otherwise a sign and the normalized factor.
    pub fn from_atom(atom: &CoeffAtom) -> Option<(Rational, Coeff)> {
        let mut c = Coeff::unit();
        let mut sign = Rational::one();
        match atom {
            CoeffAtom::TPower(m) => c.t_power = *m,
            CoeffAtom::ExpT(mu) => c.exp_t = mu.clone(),
            CoeffAtom::XPower(i, m) => {
                c.set_x(
                    *i,
                    XFactor {
                        power: *m,
                        wave: None,
                    },
                );
            }
            CoeffAtom::ExpX(i, k) => {
                if !k.is_zero() {
                    c.set_x(
                        *i,
                        XFactor {
                            power: 0,
                            wave: Some(Wave::Exp(k.clone())),
                        },
                    );
                }
            }
            CoeffAtom::Trig(i, kind, k) => {
                if k.is_zero() {
                    if *kind == TrigKind::Sin {
                        return None;
                    }
                } else {
                    if k.is_negative() && *kind == TrigKind::Sin {
                        sign = -sign;
                    }
                    c.set_x(
                        *i,
                        XFactor {
                            power: 0,
                            wave: Some(Wave::Trig(*kind, k.abs())),
                        },
                    );
                }
            }
        }
        Some((sign, c))
    }

    fn set_x(&mut self, i: usize, f: XFactor) {
        if f.is_unit() {
            self.x.remove(&i);
        } else {
            self.x.insert(i, f);
        }
    }

    pub fn mul(&self, other: &Coeff) -> Result<Coeff, ExprError> {
        let mut out = Coeff {
            t_power: self.t_power + other.t_power,
            exp_t: &self.exp_t + &other.exp_t,
            x: self.x.clone(),
        };
        for (i, f) in &other.x {
            let merged = match out.x.get(i) {
                Some(g) => g.mul(f, *i)?,
                None => f.clone(),
            };
            out.set_x(*i, merged);
        }
        Ok(out)
    }

    pub fn partial_t(&self) -> Vec<(Rational, Coeff)> {
        let mut out = Vec::with_capacity(2);
        if self.t_power > 0 {
            let mut c = self.clone();
            c.t_power -= 1;
            out.push((int(self.t_power as i64), c));
        }
        if !self.exp_t.is_zero() {
            out.push((self.exp_t.clone(), self.clone()));
        }
        out
    }

    pub fn partial_x(&self, i: usize) -> Vec<(Rational, Coeff)> {
        let Some(f) = self.x.get(&i) else {
            return Vec::new();
        };
        f.derivative()
            .into_iter()
            .map(|(c, g)| {
                let mut out = self.clone();
                out.set_x(i, g);
                (c, out)
            })
            .collect()
    }

    /// Antiderivative along `x_i` (any primitive; constants are irrelevant
    /// to the divergence identities it is used for).
    pub fn antiderivative_x(&self, i: usize) -> Vec<(Rational, Coeff)> {
        let f = self.x.get(&i).cloned().unwrap_or_default();
        f.antiderivative()
            .into_iter()
            .map(|(c, g)| {
                let mut out = self.clone();
                out.set_x(i, g);
                (c, out)
            })
            .collect()
    }

    /// Highest coordinate index referenced, plus one.
    pub fn dim_hint(&self) -> usize {
        self.x.keys().next_back().map_or(0, |i| i + 1)
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        let mut v = t.powi(self.t_power as i32);
        if !self.exp_t.is_zero() {
            v *= (to_f64(&self.exp_t) * t).exp();
        }
        for (i, f) in &self.x {
            v *= f.eval(x[*i]);
        }
        v
    }

    /// Per-coordinate trig wavenumbers when the factor is periodic in every
    /// coordinate (no polynomial or exponential x-dependence), else `None`.
    pub fn trig_wavenumbers(&self) -> Option<Vec<(usize, Rational)>> {
        let mut out = Vec::new();
        for (i, f) in &self.x {
            if f.power > 0 {
                return None;
            }
            match &f.wave {
                Some(Wave::Trig(_, k)) => out.push((*i, k.clone())),
                Some(Wave::Exp(_)) => return None,
                None => {}
            }
        }
        Some(out)
    }

    pub(crate) fn write_factors(&self, out: &mut Vec<String>) {
        match self.t_power {
            0 => {}
            1 => out.push("t".into()),
            m => out.push(format!("t^{m}")),
        }
        if !self.exp_t.is_zero() {
            out.push(format!("exp({})", linear_arg(&self.exp_t, "t")));
        }
        for (i, f) in &self.x {
            let name = format!("x{}", i + 1);
            match f.power {
                0 => {}
                1 => out.push(name.clone()),
                m => out.push(format!("{name}^{m}")),
            }
            match &f.wave {
                None => {}
                Some(Wave::Trig(kind, k)) => {
                    let fun = match kind {
                        TrigKind::Sin => "sin",
                        TrigKind::Cos => "cos",
                    };
                    out.push(format!("{fun}({})", linear_arg(k, &name)));
                }
                Some(Wave::Exp(k)) => out.push(format!("exp({})", linear_arg(k, &name))),
            }
        }
    }
}
