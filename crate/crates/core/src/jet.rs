//! Jet-space calculus: total derivatives, divergence, the Euler operator
//! and the equation's right-hand side.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::classify::default_f;
use crate::expr::rational::int;
use crate::expr::{DiffExpr, Monomial, MultiIndex, Rational, UPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("the fourth-order coefficient a must be nonzero")]
    ZeroA,
    #[error("spatial dimension must be at least 1")]
    ZeroDim,
    #[error("flux has {got} components, expected {expected}")]
    FluxLength { expected: usize, got: usize },
    #[error("formal time derivative needs an expression in t, x, u only (no u_J or u_t)")]
    FormalShape,
}

/// `u_t = a Δ²u + b(u) Δu + f(u) |∇u|² + g(u)` in `n` space dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PdeSpec {
    #[serde(serialize_with = "ser_rational")]
    pub a: Rational,
    pub b: UPoly,
    pub f: UPoly,
    pub g: UPoly,
    pub n: usize,
}

pub(crate) fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::expr::rational::fmt_rational(r))
}

impl PdeSpec {
    /// An omitted `f` defaults to `db/du`.
    pub fn new(
        a: Rational,
        b: UPoly,
        f: Option<UPoly>,
        g: UPoly,
        n: usize,
    ) -> Result<Self, JetError> {
        if a.is_zero() {
            return Err(JetError::ZeroA);
        }
        if n == 0 {
            return Err(JetError::ZeroDim);
        }
        let f = f.unwrap_or_else(|| default_f(&b));
        Ok(PdeSpec { a, b, f, g, n })
    }
}

/// `Δu = Σ_i u_{x_i x_i}`.
pub fn laplacian_u(n: usize) -> DiffExpr {
    (0..n)
        .map(|i| DiffExpr::jet(MultiIndex::from_coords(&[i, i])))
        .sum()
}

/// `|∇u|² = Σ_i u_{x_i}²`.
pub fn grad_u_squared(n: usize) -> DiffExpr {
    (0..n).map(|i| &DiffExpr::ux(i) * &DiffExpr::ux(i)).sum()
}

/// The right-hand side `a Δ²u + b(u)Δu + f(u)|∇u|² + g(u)`.
pub fn rhs(pde: &PdeSpec) -> DiffExpr {
    let n = pde.n;
    let mut bilap = DiffExpr::zero();
    for i in 0..n {
        for j in 0..n {
            bilap = bilap + DiffExpr::jet(MultiIndex::from_coords(&[i, i, j, j]));
        }
    }
    let mut out = bilap.scale(&pde.a);
    out = out + laplacian_u(n).mul_upoly(&pde.b);
    out = out + grad_u_squared(n).mul_upoly(&pde.f);
    out + DiffExpr::from_upoly(&pde.g)
}

fn assert_no_ut(e: &DiffExpr, op: &str) {
    assert!(
        !e.has_ut(),
        "{op}: u_t only lives in the extended jet of the verifier and cannot be differentiated"
    );
}

/// Total derivative `D_{x_i}` (zero-based `i`).
///
/// Panics if `e` carries the extended-jet variable `u_t`.
pub fn total_x(e: &DiffExpr, i: usize) -> DiffExpr {
    assert_no_ut(e, "total_x");
    let ui = MultiIndex::unit(i);
    let mut out = e.partial_x(i);
    let mut terms: Vec<(Rational, Monomial)> = Vec::new();
    for (m, c) in e.terms() {
        for (dc, du) in m.u.derivative() {
            let mono = Monomial { u: du, ..m.clone() }.with_jet(ui.clone(), 1);
            terms.push((c * dc, mono));
        }
        for (j, &p) in &m.jets {
            let mono = m.clone().with_jet(j.clone(), -1).with_jet(j.raised(i), 1);
            terms.push((c * int(p as i64), mono));
        }
    }
    out.add_scaled(&DiffExpr::from_terms(terms), &Rational::one());
    out
}

/// `D_J e`: the composition of `total_x` over the coordinates of `J`.
pub fn total_deriv(e: &DiffExpr, j: &MultiIndex) -> DiffExpr {
    j.coords()
        .into_iter()
        .fold(e.clone(), |acc, i| total_x(&acc, i))
}

/// Total time derivative on solutions: every `u_J` evolves by
/// `D_J(rhs)`.
pub fn total_t(e: &DiffExpr, pde: &PdeSpec) -> DiffExpr {
    assert_no_ut(e, "total_t");
    let r = rhs(pde);
    let mut out = e.partial_t();
    out = out + &e.partial_u() * &r;
    for j in e.jet_indices() {
        out = out + &e.partial_jet(&j) * &total_deriv(&r, &j);
    }
    out
}

/// Off-shell time derivative in the extended jet: `∂e/∂t + (∂e/∂u) u_t`.
/// Only defined for expressions in `t, x, u`.
pub fn formal_t(e: &DiffExpr) -> Result<DiffExpr, JetError> {
    if e.has_jets() || e.has_ut() {
        return Err(JetError::FormalShape);
    }
    Ok(e.partial_t() + &e.partial_u() * &DiffExpr::ut())
}

/// Total divergence `Σ_i D_{x_i} X_i`.
pub fn divergence(flux: &[DiffExpr], n: usize) -> Result<DiffExpr, JetError> {
    if flux.len() != n {
        return Err(JetError::FluxLength {
            expected: n,
            got: flux.len(),
        });
    }
    Ok(flux.iter().enumerate().map(|(i, x)| total_x(x, i)).sum())
}

/// Euler operator `E_u = Σ_J (-D)_J ∂/∂u_J`, summed over the multi-indices
/// present in `e`.
pub fn euler(e: &DiffExpr) -> DiffExpr {
    assert_no_ut(e, "euler");
    let mut out = e.partial_u();
    for j in e.jet_indices() {
        let term = total_deriv(&e.partial_jet(&j), &j);
        if j.order() % 2 == 0 {
            out = out + term;
        } else {
            out = out - term;
        }
    }
    out
}

/// Explicit spatial partial `∂_J` of a coefficient function.
pub fn partial_multi(e: &DiffExpr, j: &MultiIndex) -> DiffExpr {
    j.coords()
        .into_iter()
        .fold(e.clone(), |acc, i| acc.partial_x(i))
}

/// Explicit Laplacian of a coefficient function.
pub fn laplacian_coeff(e: &DiffExpr, n: usize) -> DiffExpr {
    (0..n).map(|i| e.partial_x(i).partial_x(i)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{preset, Preset};
    use crate::expr::rational::rat;
    use crate::expr::{parse_expr, parse_upoly};

    fn e(s: &str) -> DiffExpr {
        parse_expr(s).unwrap()
    }

    fn ks(n: usize) -> PdeSpec {
        preset(&Preset::KuramotoSivashinsky, n).unwrap()
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(rhs(&ks(1)), e("-u_x1x1x1x1 - u_x1x1 - 1/2*u_x1^2"));
        let ch = preset(
            &Preset::CahnHilliard {
                c1: int(1),
                c2: int(1),
            },
            1,
        )
        .unwrap();
        assert_eq!(rhs(&ch), e("u_x1x1x1x1 + (3*u^2 - 1)*u_x1x1 + 6*u*u_x1^2"));
        let lin = PdeSpec::new(int(1), UPoly::zero(), None, UPoly::zero(), 2).unwrap();
        assert_eq!(rhs(&lin), e("u_x1x1x1x1 + 2*u_x1x1x2x2 + u_x2x2x2x2"));
    }

    #[test]
    fn total_x_examples() {
        assert_eq!(total_x(&e("u^2"), 1), e("2*u*u_x2"));
        assert_eq!(total_x(&e("x1*u_x1"), 0), e("u_x1 + x1*u_x1x1"));
        let b = parse_upoly("3*u^2 - 1 + exp(2*u)").unwrap();
        assert_eq!(
            total_x(&DiffExpr::from_upoly(&b), 0),
            DiffExpr::from_upoly(&b.derivative()) * DiffExpr::ux(0)
        );
    }

    #[test]
    fn total_t_examples() {
        assert_eq!(total_t(&DiffExpr::u(), &ks(1)), rhs(&ks(1)));
        assert_eq!(total_t(&DiffExpr::t(), &ks(1)), DiffExpr::one());
        // d/dt(exp(-c2 t) u) with a = 1, b = f = 0, g = c2 u + c3; expanded
        // independently: -c2 e u + e (u_xxxx + c2 u + c3) = e (u_xxxx + c3)
        let (c2, c3) = (rat(3, 2), int(5));
        let g = UPoly::from_terms([
            (c2.clone(), crate::expr::UKey::new(1, int(0))),
            (c3.clone(), crate::expr::UKey::unit()),
        ]);
        let pde = PdeSpec::new(int(1), UPoly::zero(), None, g, 1).unwrap();
        let decay = DiffExpr::atom(&crate::expr::CoeffAtom::ExpT(-c2.clone()));
        let got = total_t(&(&decay * &DiffExpr::u()), &pde);
        let want = &decay * &(e("u_x1x1x1x1") + DiffExpr::constant(c3));
        assert_eq!(got, want);
    }

    #[test]
    fn formal_t_examples() {
        assert_eq!(formal_t(&DiffExpr::u()).unwrap(), DiffExpr::ut());
        assert_eq!(
            formal_t(&e("exp(3*t)*x1*u")).unwrap(),
            e("3*exp(3*t)*x1*u + exp(3*t)*x1*u_t")
        );
        assert_eq!(formal_t(&e("cos(x1)")).unwrap(), DiffExpr::zero());
        assert_eq!(formal_t(&e("u_x1")), Err(JetError::FormalShape));
    }

    #[test]
    fn divergence_examples() {
        assert_eq!(divergence(&[DiffExpr::u()], 1).unwrap(), DiffExpr::ux(0));
        assert!(divergence(&[e("-u_x2"), e("u_x1")], 2).unwrap().is_zero());
        assert_eq!(
            divergence(&[e("x1*u"), e("x2*u")], 2).unwrap(),
            e("2*u + x1*u_x1 + x2*u_x2")
        );
        assert_eq!(
            divergence(&[DiffExpr::u()], 2),
            Err(JetError::FluxLength {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn euler_examples() {
        // E(u_x^2/2) = ∂/∂u - D_x ∂/∂u_x = 0 - D_x(u_x)
        assert_eq!(euler(&e("1/2*u_x1^2")), e("-u_x1x1"));
        assert_eq!(euler(&e("1/3*u^3")), e("u^2"));
        let f = e("x1*u^2*u_x1x2 + exp(u)*u_x2^3");
        assert!(euler(&total_x(&f, 0)).is_zero());
    }

    #[test]
    fn zero_coefficient_rejected() {
        assert_eq!(
            PdeSpec::new(int(0), UPoly::zero(), None, UPoly::zero(), 1),
            Err(JetError::ZeroA)
        );
        assert_eq!(
            PdeSpec::new(int(1), UPoly::zero(), None, UPoly::zero(), 0),
            Err(JetError::ZeroDim)
        );
    }
}
