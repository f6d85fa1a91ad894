//! Differential functions: exact sums of terms in `t, x, u, u_J` (and,
//! inside the verifier only, a linear `u_t`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use super::coeff::{Coeff, CoeffAtom};
use super::rational::{int, to_f64, Rational};
use super::upoly::{write_sum, UKey, UPoly};
use super::ExprError;

/// Spatial derivative multi-index. Trailing zeros are trimmed so indices
/// compare the same regardless of the ambient dimension.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(orders: &[u32]) -> Self {
        let mut v = orders.to_vec();
        while v.last() == Some(&0) {
            v.pop();
        }
        MultiIndex(v)
    }

    /// `e_i`: the first derivative along coordinate `i` (zero-based).
    pub fn unit(i: usize) -> Self {
        MultiIndex::zero().raised(i)
    }

    pub fn zero() -> Self {
        MultiIndex(Vec::new())
    }

    /// Builds the index of `d/dx_{i1} d/dx_{i2} ...` from a coordinate list.
    pub fn from_coords(coords: &[usize]) -> Self {
        coords.iter().fold(MultiIndex::zero(), |j, &i| j.raised(i))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn orders(&self, n: usize) -> Vec<u32> {
        (0..n).map(|i| self.get(i)).collect()
    }

    pub fn raised(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        if v.len() <= i {
            v.resize(i + 1, 0);
        }
        v[i] += 1;
        MultiIndex(v)
    }

    pub fn dim_hint(&self) -> usize {
        self.0.len()
    }

    /// Coordinates with multiplicity, e.g. `u_{x1x1x2}` gives `[0, 0, 1]`.
    pub fn coords(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &m)| std::iter::repeat_n(i, m as usize))
            .collect()
    }

    pub fn name(&self) -> String {
        let mut s = String::from("u_");
        for i in self.coords() {
            s.push_str(&format!("x{}", i + 1));
        }
        s
    }
}

/// A single product of atoms: coefficient function, `u`-part, jet
/// factors `u_J^m` with `|J| >= 1`, and an optional linear `u_t`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub coeff: Coeff,
    pub u: UKey,
    pub jets: BTreeMap<MultiIndex, u32>,
    pub ut: bool,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial {
            coeff: Coeff::unit(),
            u: UKey::unit(),
            jets: BTreeMap::new(),
            ut: false,
        }
    }

    fn mul(&self, other: &Monomial) -> Result<Monomial, ExprError> {
        if self.ut && other.ut {
            return Err(ExprError::UtPower);
        }
        let mut jets = self.jets.clone();
        for (j, m) in &other.jets {
            *jets.entry(j.clone()).or_insert(0) += m;
        }
        Ok(Monomial {
            coeff: self.coeff.mul(&other.coeff)?,
            u: self.u.mul(&other.u),
            jets,
            ut: self.ut || other.ut,
        })
    }

    pub(crate) fn with_jet(mut self, j: MultiIndex, delta: i64) -> Monomial {
        let m = self.jets.get(&j).copied().unwrap_or(0) as i64 + delta;
        if m <= 0 {
            self.jets.remove(&j);
        } else {
            self.jets.insert(j, m as u32);
        }
        self
    }

    fn factors(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.coeff.write_factors(&mut out);
        self.u.write_factors(&mut out);
        for (j, m) in &self.jets {
            if *m == 1 {
                out.push(j.name());
            } else {
                out.push(format!("{}^{m}", j.name()));
            }
        }
        if self.ut {
            out.push("u_t".into());
        }
        out
    }
}

/// Canonical, fully expanded differential function.
///
/// Terms are merged and zero coefficients dropped on every operation, so
/// `is_zero` is an exact test and `==` is mathematical equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiffExpr {
    terms: BTreeMap<Monomial, Rational>,
}

impl DiffExpr {
    pub fn zero() -> Self {
        DiffExpr::default()
    }

    pub fn constant(c: Rational) -> Self {
        DiffExpr::from_monomial(c, Monomial::unit())
    }

    pub fn one() -> Self {
        DiffExpr::constant(Rational::one())
    }

    pub fn from_monomial(c: Rational, m: Monomial) -> Self {
        let mut e = DiffExpr::zero();
        e.add_term(m, c);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, Monomial)>) -> Self {
        let mut e = DiffExpr::zero();
        for (c, m) in terms {
            e.add_term(m, c);
        }
        e
    }

    /// The dependent variable `u`.
    pub fn u() -> Self {
        DiffExpr::from_upoly(&UPoly::u())
    }

    /// Jet coordinate `u_J`; `J = 0` gives `u` itself.
    pub fn jet(j: MultiIndex) -> Self {
        if j.is_zero() {
            return DiffExpr::u();
        }
        DiffExpr::from_monomial(Rational::one(), Monomial::unit().with_jet(j, 1))
    }

    /// `u_{x_i}` (zero-based `i`).
    pub fn ux(i: usize) -> Self {
        DiffExpr::jet(MultiIndex::unit(i))
    }

    /// The extended-jet variable `u_t`.
    pub fn ut() -> Self {
        DiffExpr::from_monomial(
            Rational::one(),
            Monomial {
                ut: true,
                ..Monomial::unit()
            },
        )
    }

    pub fn t() -> Self {
        DiffExpr::atom(&CoeffAtom::TPower(1))
    }

    /// Coordinate function `x_i` (zero-based `i`).
    pub fn x(i: usize) -> Self {
        DiffExpr::atom(&CoeffAtom::XPower(i, 1))
    }

    pub fn atom(a: &CoeffAtom) -> Self {
        match Coeff::from_atom(a) {
            None => DiffExpr::zero(),
            Some((sign, coeff)) => DiffExpr::from_coeff(sign, coeff),
        }
    }

    pub fn from_coeff(c: Rational, coeff: Coeff) -> Self {
        DiffExpr::from_monomial(
            c,
            Monomial {
                coeff,
                ..Monomial::unit()
            },
        )
    }

    /// Product of atoms; errors on a closure violation.
    pub fn atoms(atoms: &[CoeffAtom]) -> Result<Self, ExprError> {
        atoms
            .iter()
            .try_fold(DiffExpr::one(), |acc, a| acc.try_mul(&DiffExpr::atom(a)))
    }

    pub fn from_upoly(p: &UPoly) -> Self {
        DiffExpr::from_terms(p.terms().map(|(k, c)| {
            (
                c.clone(),
                Monomial {
                    u: k.clone(),
                    ..Monomial::unit()
                },
            )
        }))
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                *slot += c;
                if slot.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact zero test.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return DiffExpr::zero();
        }
        DiffExpr {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &DiffExpr, c: &Rational) {
        for (m, v) in &other.terms {
            self.add_term(m.clone(), v * c);
        }
    }

    pub fn try_mul(&self, other: &DiffExpr) -> Result<DiffExpr, ExprError> {
        let mut out = DiffExpr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2)?, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn mul_upoly(&self, p: &UPoly) -> DiffExpr {
        self * &DiffExpr::from_upoly(p)
    }

    pub fn try_pow(&self, k: u32) -> Result<DiffExpr, ExprError> {
        (0..k).try_fold(DiffExpr::one(), |acc, _| acc.try_mul(self))
    }

    fn map_terms(&self, f: impl Fn(&Monomial) -> Vec<(Rational, Monomial)>) -> DiffExpr {
        let mut out = DiffExpr::zero();
        for (m, c) in &self.terms {
            for (dc, dm) in f(m) {
                out.add_term(dm, c * dc);
            }
        }
        out
    }

    /// Explicit partial derivative in `t` (jet variables held fixed).
    pub fn partial_t(&self) -> DiffExpr {
        self.map_terms(|m| {
            m.coeff
                .partial_t()
                .into_iter()
                .map(|(c, coeff)| (c, Monomial { coeff, ..m.clone() }))
                .collect()
        })
    }

    /// Explicit partial derivative in `x_i` (jet variables held fixed).
    pub fn partial_x(&self, i: usize) -> DiffExpr {
        self.map_terms(|m| {
            m.coeff
                .partial_x(i)
                .into_iter()
                .map(|(c, coeff)| (c, Monomial { coeff, ..m.clone() }))
                .collect()
        })
    }

    /// `d/du` treating every `u_J`, `|J| >= 1`, as independent.
    pub fn partial_u(&self) -> DiffExpr {
        self.map_terms(|m| {
            m.u.derivative()
                .into_iter()
                .map(|(c, u)| (c, Monomial { u, ..m.clone() }))
                .collect()
        })
    }

    /// `d/du_J`; `J = 0` is `partial_u`.
    pub fn partial_jet(&self, j: &MultiIndex) -> DiffExpr {
        if j.is_zero() {
            return self.partial_u();
        }
        self.map_terms(|m| match m.jets.get(j) {
            None => Vec::new(),
            Some(&p) => vec![(int(p as i64), m.clone().with_jet(j.clone(), -1))],
        })
    }

    pub fn partial_ut(&self) -> DiffExpr {
        self.map_terms(|m| {
            if m.ut {
                vec![(
                    Rational::one(),
                    Monomial {
                        ut: false,
                        ..m.clone()
                    },
                )]
            } else {
                Vec::new()
            }
        })
    }

    /// Some antiderivative in `x_i`; only defined for coefficient-only
    /// expressions (functions of `t, x`).
    pub fn antiderivative_x(&self, i: usize) -> Option<DiffExpr> {
        if !self.is_coefficient_only() {
            return None;
        }
        Some(self.map_terms(|m| {
            m.coeff
                .antiderivative_x(i)
                .into_iter()
                .map(|(c, coeff)| (c, Monomial { coeff, ..m.clone() }))
                .collect()
        }))
    }

    /// Multi-indices `J` with `|J| >= 1` that occur in some term.
    pub fn jet_indices(&self) -> BTreeSet<MultiIndex> {
        self.terms
            .keys()
            .flat_map(|m| m.jets.keys().cloned())
            .collect()
    }

    pub fn max_jet_order(&self) -> u32 {
        self.jet_indices()
            .iter()
            .map(MultiIndex::order)
            .max()
            .unwrap_or(0)
    }

    pub fn has_jets(&self) -> bool {
        self.terms.keys().any(|m| !m.jets.is_empty())
    }

    pub fn has_ut(&self) -> bool {
        self.terms.keys().any(|m| m.ut)
    }

    pub fn depends_on_u(&self) -> bool {
        self.terms.keys().any(|m| !m.u.is_unit())
    }

    /// True when the expression is a function of `t, x` alone.
    pub fn is_coefficient_only(&self) -> bool {
        !self.has_jets() && !self.has_ut() && !self.depends_on_u()
    }

    /// Smallest dimension consistent with every coordinate referenced.
    pub fn dim_hint(&self) -> usize {
        self.terms
            .keys()
            .map(|m| {
                m.jets
                    .keys()
                    .map(MultiIndex::dim_hint)
                    .max()
                    .unwrap_or(0)
                    .max(m.coeff.dim_hint())
            })
            .max()
            .unwrap_or(0)
    }

    /// Replaces the `u_t` variable by `replacement`.
    pub fn substitute_ut(&self, replacement: &DiffExpr) -> DiffExpr {
        let mut out = DiffExpr::zero();
        for (m, c) in &self.terms {
            if m.ut {
                let rest = DiffExpr::from_monomial(
                    c.clone(),
                    Monomial {
                        ut: false,
                        ..m.clone()
                    },
                );
                let prod = &rest * replacement;
                out.add_scaled(&prod, &Rational::one());
            } else {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Floating-point evaluation at a jet point.
    pub fn eval(&self, p: &JetPoint<'_>) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut v = to_f64(c) * m.coeff.eval(p.t, p.x) * m.u.eval(p.u);
                for (j, k) in &m.jets {
                    v *= (p.jets)(j).powi(*k as i32);
                }
                if m.ut {
                    v *= p.ut;
                }
                v
            })
            .sum()
    }
}

/// Numerical values of every variable a [`DiffExpr`] may reference.
pub struct JetPoint<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub u: f64,
    pub jets: &'a dyn Fn(&MultiIndex) -> f64,
    pub ut: f64,
}

impl Add for &DiffExpr {
    type Output = DiffExpr;
    fn add(self, rhs: &DiffExpr) -> DiffExpr {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rational::one());
        out
    }
}

impl Sub for &DiffExpr {
    type Output = DiffExpr;
    fn sub(self, rhs: &DiffExpr) -> DiffExpr {
        let mut out = self.clone();
        out.add_scaled(rhs, &int(-1));
        out
    }
}

impl Neg for &DiffExpr {
    type Output = DiffExpr;
    fn neg(self) -> DiffExpr {
        self.scale(&int(-1))
    }
}

/// Panics on a closure violation; use [`DiffExpr::try_mul`] when the
/// operands are not known to be compatible.
impl Mul for &DiffExpr {
    type Output = DiffExpr;
    fn mul(self, rhs: &DiffExpr) -> DiffExpr {
        match self.try_mul(rhs) {
            Ok(e) => e,
            Err(err) => panic!("product outside the coefficient class: {err}"),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for DiffExpr {
            type Output = DiffExpr;
            fn $method(self, rhs: DiffExpr) -> DiffExpr {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&DiffExpr> for DiffExpr {
            type Output = DiffExpr;
            fn $method(self, rhs: &DiffExpr) -> DiffExpr {
                (&self).$method(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for DiffExpr {
    type Output = DiffExpr;
    fn neg(self) -> DiffExpr {
        (&self).neg()
    }
}

impl std::iter::Sum for DiffExpr {
    fn sum<I: Iterator<Item = DiffExpr>>(iter: I) -> DiffExpr {
        iter.fold(DiffExpr::zero(), |mut acc, e| {
            acc.add_scaled(&e, &Rational::one());
            acc
        })
    }
}

impl From<&UPoly> for DiffExpr {
    fn from(p: &UPoly) -> Self {
        DiffExpr::from_upoly(p)
    }
}

impl fmt::Display for DiffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sum(f, self.terms.iter().map(|(m, c)| (c, m.factors())))
    }
}

impl Serialize for DiffExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::coeff::TrigKind;

    fn cos1() -> DiffExpr {
        DiffExpr::atom(&CoeffAtom::Trig(0, TrigKind::Cos, int(1)))
    }

    #[test]
    fn squares_and_inverses() {
        let ux = DiffExpr::ux(0);
        let sq = &ux * &ux;
        assert_eq!(sq.to_string(), "u_x1^2");
        assert!((&sq + &sq.scale(&int(-1))).is_zero());
    }

    #[test]
    fn like_terms_merge() {
        let e = &cos1() * &DiffExpr::ux(0);
        let s = &e + &e;
        assert_eq!(s.len(), 1);
        assert_eq!(s.to_string(), "2*cos(x1)*u_x1");
    }

    #[test]
    fn mixed_partials_share_one_index() {
        let a = DiffExpr::jet(MultiIndex::from_coords(&[0, 1]));
        let b = DiffExpr::jet(MultiIndex::from_coords(&[1, 0]));
        assert!((&a - &b).is_zero());
        assert!(DiffExpr::zero().is_zero());
    }

    #[test]
    fn ut_squared_is_rejected() {
        assert_eq!(
            DiffExpr::ut().try_mul(&DiffExpr::ut()),
            Err(ExprError::UtPower)
        );
    }

    #[test]
    fn trig_product_on_one_coordinate_is_rejected() {
        let s = DiffExpr::atom(&CoeffAtom::Trig(0, TrigKind::Sin, int(1)));
        assert!(matches!(
            s.try_mul(&cos1()),
            Err(ExprError::Closure { coord: 0 })
        ));
    }

    #[test]
    fn jet_index_helpers() {
        let j = MultiIndex::from_coords(&[1, 0, 1]);
        assert_eq!(j.orders(3), vec![1, 2, 0]);
        assert_eq!(j.order(), 3);
        assert_eq!(j.name(), "u_x1x2x2");
        assert_eq!(MultiIndex::new(&[0, 0]), MultiIndex::zero());
        assert!(MultiIndex::new(&[1, 0]) < MultiIndex::new(&[1, 1]));
        assert!(MultiIndex::new(&[2]) > MultiIndex::new(&[1, 1]));
    }

    #[test]
    fn substitute_ut_replaces_linear_slot() {
        let e = &DiffExpr::x(0) * &DiffExpr::ut();
        let r = e.substitute_ut(&DiffExpr::ux(0));
        assert_eq!(r, &DiffExpr::x(0) * &DiffExpr::ux(0));
    }
}
