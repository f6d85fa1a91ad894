//! Exponential polynomials in `u`: finite sums of `c * u^p * exp(alpha*u)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use super::rational::{fmt_rational, int, to_f64, Rational};

/// Exponent pair `(p, alpha)` of a single `u^p * exp(alpha*u)` term.
///
/// Ordering puts higher powers first and, for equal power, smaller `alpha`
/// first, which is the canonical print order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UKey {
    pub power: u32,
    pub exp_arg: Rational,
}

impl Ord for UKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .power
            .cmp(&self.power)
            .then_with(|| self.exp_arg.cmp(&other.exp_arg))
    }
}

impl PartialOrd for UKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for UKey {
    fn default() -> Self {
        UKey::unit()
    }
}

impl UKey {
    pub fn new(power: u32, exp_arg: Rational) -> Self {
        UKey { power, exp_arg }
    }

    pub fn unit() -> Self {
        UKey::new(0, Rational::zero())
    }

    pub fn is_unit(&self) -> bool {
        self.power == 0 && self.exp_arg.is_zero()
    }

    pub fn mul(&self, other: &UKey) -> UKey {
        UKey::new(self.power + other.power, &self.exp_arg + &other.exp_arg)
    }

    /// `d/du` of the bare term, as `(coefficient, key)` pairs.
    pub fn derivative(&self) -> Vec<(Rational, UKey)> {
        let mut out = Vec::with_capacity(2);
        if self.power > 0 {
            out.push((
                int(self.power as i64),
                UKey::new(self.power - 1, self.exp_arg.clone()),
            ));
        }
        if !self.exp_arg.is_zero() {
            out.push((self.exp_arg.clone(), self.clone()));
        }
        out
    }

    pub fn eval(&self, u: f64) -> f64 {
        let mut v = u.powi(self.power as i32);
        if !self.exp_arg.is_zero() {
            v *= (to_f64(&self.exp_arg) * u).exp();
        }
        v
    }

    /// Appends the `*`-joined factor text (empty for the unit key).
    pub(crate) fn write_factors(&self, out: &mut Vec<String>) {
        match self.power {
            0 => {}
            1 => out.push("u".into()),
            p => out.push(format!("u^{p}")),
        }
        if !self.exp_arg.is_zero() {
            out.push(format!("exp({})", linear_arg(&self.exp_arg, "u")));
        }
    }
}

/// `k*var` in parser-compatible form: `u`, `-u`, `2*u`, `-3/2*u`.
pub(crate) fn linear_arg(k: &Rational, var: &str) -> String {
    if k.is_one() {
        var.to_string()
    } else if (-k).is_one() {
        format!("-{var}")
    } else {
        format!("{}*{var}", fmt_rational(k))
    }
}

/// Canonical exponential polynomial in `u`.
///
/// No zero coefficients are stored and every `(power, exp_arg)` pair occurs
/// at most once, so structural equality is mathematical equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UPoly {
    terms: BTreeMap<UKey, Rational>,
}

impl UPoly {
    pub fn zero() -> Self {
        UPoly::default()
    }

    pub fn constant(c: Rational) -> Self {
        UPoly::term(c, 0, Rational::zero())
    }

    pub fn one() -> Self {
        UPoly::constant(Rational::one())
    }

    pub fn u() -> Self {
        UPoly::term(Rational::one(), 1, Rational::zero())
    }

    pub fn term(c: Rational, power: u32, exp_arg: Rational) -> Self {
        let mut p = UPoly::zero();
        p.add_term(UKey::new(power, exp_arg), c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, UKey)>) -> Self {
        let mut p = UPoly::zero();
        for (c, k) in terms {
            p.add_term(k, c);
        }
        p
    }

    fn add_term(&mut self, key: UKey, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&UKey, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (k, c) = self.terms.iter().next().unwrap();
                k.is_unit().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return UPoly::zero();
        }
        UPoly {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        let mut out = UPoly::zero();
        for (k, c) in &self.terms {
            for (dc, dk) in k.derivative() {
                out.add_term(dk, c * dc);
            }
        }
        out
    }

    /// `d^k/du^k`.
    pub fn nth_derivative(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative normalized to vanish at `u = 0`.
    ///
    /// Closed for every term: `u^p exp(alpha u)` integrates by parts to
    /// `exp(alpha u) * sum_j (-1)^j p!/(p-j)! u^(p-j) / alpha^(j+1)`.
    pub fn antiderivative(&self) -> Self {
        let mut out = UPoly::zero();
        for (k, c) in &self.terms {
            if k.exp_arg.is_zero() {
                out.add_term(
                    UKey::new(k.power + 1, Rational::zero()),
                    c / int(k.power as i64 + 1),
                );
            } else {
                let alpha = &k.exp_arg;
                let mut falling = Rational::one();
                let mut alpha_pow = alpha.clone();
                for j in 0..=k.power {
                    let sign = if j % 2 == 0 { int(1) } else { int(-1) };
                    out.add_term(
                        UKey::new(k.power - j, alpha.clone()),
                        c * &sign * &falling / &alpha_pow,
                    );
                    falling *= int((k.power - j) as i64);
                    alpha_pow *= alpha;
                }
            }
        }
        let at_zero = out.eval_at_zero();
        &out - &UPoly::constant(at_zero)
    }

    /// Exact value at `u = 0`.
    pub fn eval_at_zero(&self) -> Rational {
        self.terms
            .iter()
            .filter(|(k, _)| k.power == 0)
            .fold(Rational::zero(), |acc, (_, c)| acc + c)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.terms.iter().map(|(k, c)| to_f64(c) * k.eval(u)).sum()
    }

    /// `Some(c)` with `self == c * other`, when such a rational exists.
    /// `other` must be nonzero.
    pub fn ratio_to(&self, other: &UPoly) -> Option<Rational> {
        let (lead_key, lead) = other.terms.iter().next()?;
        let c = self
            .terms
            .get(lead_key)
            .map(|v| v / lead)
            .unwrap_or_else(Rational::zero);
        (self - &other.scale(&c)).is_zero().then_some(c)
    }

    /// True when every term is polynomial (no `exp(alpha u)` factor).
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|k| k.exp_arg.is_zero())
    }
}

impl Add for &UPoly {
    type Output = UPoly;
    fn add(self, rhs: &UPoly) -> UPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl Sub for &UPoly {
    type Output = UPoly;
    fn sub(self, rhs: &UPoly) -> UPoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), -c);
        }
        out
    }
}

impl Mul for &UPoly {
    type Output = UPoly;
    fn mul(self, rhs: &UPoly) -> UPoly {
        let mut out = UPoly::zero();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &rhs.terms {
                out.add_term(k1.mul(k2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &UPoly {
    type Output = UPoly;
    fn neg(self) -> UPoly {
        self.scale(&int(-1))
    }
}

/// Writes a signed sum of terms; each term is `(coefficient, factors)`.
pub(crate) fn write_sum<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a Rational, Vec<String>)>,
) -> fmt::Result {
    let mut first = true;
    for (c, factors) in terms {
        let negative = c.is_negative();
        let mag = c.abs();
        if first {
            if negative {
                f.write_str("-")?;
            }
        } else {
            f.write_str(if negative { " - " } else { " + " })?;
        }
        first = false;
        let body = factors.join("*");
        if factors.is_empty() {
            f.write_str(&fmt_rational(&mag))?;
        } else if mag.is_one() {
            f.write_str(&body)?;
        } else {
            write!(f, "{}*{}", fmt_rational(&mag), body)?;
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sum(
            f,
            self.terms.iter().map(|(k, c)| {
                let mut factors = Vec::new();
                k.write_factors(&mut factors);
                (c, factors)
            }),
        )
    }
}

impl Serialize for UPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
