//! Closed-form densities and fluxes exactly as tabulated in the literature,
//! kept for auditing against [`super::flux`]. These do not balance in
//! general: the case I density needs `c3 = 1`, the case II flux fails once
//! `b` or `c3` enter, and the case III flux needs `c4 = 1`.

use num_traits::{One, Zero};

use super::{check_case, laplacian_u_x, Characteristic, ConsLaw, ConsLawError};
use crate::classify::{Classification, Variant};
use crate::expr::{DiffExpr, MultiIndex, Rational};
use crate::jet::{laplacian_u, PdeSpec};

/// Tabulated `(T, X)`; `None` for case I with `c2 = 0`, where the
/// tabulated density is undefined.
pub fn law(
    cls: &Classification,
    ch: &Characteristic,
    pde: &PdeSpec,
) -> Result<Option<ConsLaw>, ConsLawError> {
    check_case(cls, ch)?;
    let n = pde.n;
    let a = &pde.a;
    let q = &ch.q;
    let u = DiffExpr::u();
    let lap_u = laplacian_u(n);
    let mut x = Vec::with_capacity(n);
    let t;
    match &cls.variant {
        Variant::CaseI { c1, c2, .. } => {
            if c2.is_zero() {
                return Ok(None);
            }
            let inv = Rational::one() / c2;
            t = &u * q + q.scale(&inv);
            let v = &u + &DiffExpr::constant(inv);
            for i in 0..n {
                let dq = q.partial_x(i);
                let ui = DiffExpr::ux(i);
                let mut bracket = DiffExpr::zero();
                for j in 0..n {
                    let djj = q.partial_x(j).partial_x(j);
                    let ujj = DiffExpr::jet(MultiIndex::from_coords(&[j, j]));
                    let ujji = DiffExpr::jet(MultiIndex::from_coords(&[j, j, i]));
                    bracket =
                        bracket + &v * &djj.partial_x(i) - &ui * &djj + &ujj * &dq - &ujji * q;
                }
                x.push((&v * &dq - &ui * q).scale(c1) + bracket.scale(a));
            }
        }
        Variant::CaseII { c3, .. } => {
            t = &u * q;
            let b_tilde = pde.b.antiderivative();
            let half = Rational::new(1.into(), 2.into());
            for i in 0..n {
                let dq = q.partial_x(i);
                let xi_coord = DiffExpr::x(i);
                let mut sum = DiffExpr::zero();
                for j in 0..n {
                    let ujj = DiffExpr::jet(MultiIndex::from_coords(&[j, j]));
                    let ujji = DiffExpr::jet(MultiIndex::from_coords(&[j, j, i]));
                    sum = sum + (&dq * &ujj).scale(a) - (&ujji * q).scale(a)
                        + (q * &DiffExpr::ux(j)).mul_upoly(&pde.b)
                        + q.partial_x(j).mul_upoly(&b_tilde);
                }
                let c3_terms = (&xi_coord * q).scale(c3)
                    + (&(&xi_coord * &xi_coord) * &dq).scale(&(c3 * &half));
                x.push(sum - c3_terms);
            }
        }
        Variant::CaseIII { c4, c5 } => {
            t = &u * q;
            let inv = Rational::one() / c4;
            let dg = pde.g.derivative();
            for i in 0..n {
                let dq = q.partial_x(i);
                let qui = q * &DiffExpr::ux(i);
                let udq = &u * &dq;
                let sum = (&dq * &lap_u - q * &laplacian_u_x(i, n)).scale(a);
                x.push(
                    qui.scale(a) - udq.scale(a) - qui.scale(c5) + udq.scale(c5)
                        - qui.mul_upoly(&dg).scale(&inv)
                        + dq.mul_upoly(&pde.g).scale(&inv)
                        + sum,
                );
            }
        }
        _ => unreachable!("check_case admits only cases I-III"),
    }
    Ok(Some(ConsLaw {
        q: ch.clone(),
        t,
        x,
    }))
}
