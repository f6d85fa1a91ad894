//! Finite, exactly verified bases of characteristics for each case.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::{CaseTag, Characteristic, ConsLawError, Mode, ModeSelector, WaveKind};
use crate::classify::{Classification, Variant};
use crate::expr::rational::{binomial, factorial, int, rational_sqrt};
use crate::expr::{CoeffAtom, DiffExpr, Rational, TrigKind};
use crate::jet::laplacian_coeff;

/// Residual of the case-I characteristic equation
/// `Q_t + a Δ²Q + c2 Q + c1 ΔQ`.
pub fn case_i_residual(
    q: &DiffExpr,
    a: &Rational,
    c1: &Rational,
    c2: &Rational,
    n: usize,
) -> DiffExpr {
    let lap = laplacian_coeff(q, n);
    q.partial_t() + laplacian_coeff(&lap, n).scale(a) + q.scale(c2) + lap.scale(c1)
}

/// `ΔQ̃ + c Q̃`; zero for harmonic (`c = 0`) and Helmholtz modes.
pub fn helmholtz_residual(q: &DiffExpr, c: &Rational, n: usize) -> DiffExpr {
    laplacian_coeff(q, n) + q.scale(c)
}

fn norm2(k: &[Rational]) -> Rational {
    k.iter().fold(Rational::zero(), |acc, ki| acc + ki * ki)
}

/// Sort key: `|k|²`, then `k` lexicographically.
fn sort_wavevectors(ks: &mut Vec<Vec<Rational>>) {
    ks.sort_by(|a, b| norm2(a).cmp(&norm2(b)).then_with(|| a.cmp(b)));
    ks.dedup();
}

/// Integer vectors with `|k|² <= bound` (`exact`: `== bound`); with
/// `nonnegative`, only the first orthant.
fn integer_wavevectors(n: usize, bound: i64, exact: bool, nonnegative: bool) -> Vec<Vec<Rational>> {
    let r = (bound.max(0) as f64).sqrt().floor() as i64;
    let lo = if nonnegative { 0 } else { -r };
    let mut out = Vec::new();
    let mut cur = vec![lo; n];
    loop {
        let s: i64 = cur.iter().map(|v| v * v).sum();
        if (exact && s == bound) || (!exact && s <= bound) {
            out.push(cur.iter().map(|&v| int(v)).collect());
        }
        let mut i = n;
        loop {
            if i == 0 {
                sort_wavevectors(&mut out);
                return out;
            }
            i -= 1;
            if cur[i] < r {
                cur[i] += 1;
                break;
            }
            cur[i] = lo;
        }
    }
}

/// Every `sin`/`cos` product for a wavevector; zero components contribute
/// no factor. Cosines come before sines, first coordinate most significant.
fn trig_products(k: &[Rational]) -> Vec<(Vec<Option<TrigKind>>, DiffExpr)> {
    let active: Vec<usize> = (0..k.len()).filter(|&i| !k[i].is_zero()).collect();
    let mut out = Vec::new();
    for mask in 0..(1u32 << active.len()) {
        let mut kinds = vec![None; k.len()];
        let mut atoms = Vec::new();
        for (bit, &i) in active.iter().enumerate() {
            let sin = mask & (1 << (active.len() - 1 - bit)) != 0;
            let kind = if sin { TrigKind::Sin } else { TrigKind::Cos };
            kinds[i] = Some(kind);
            atoms.push(CoeffAtom::Trig(i, kind, k[i].abs()));
        }
        let q = DiffExpr::atoms(&atoms).expect("one factor per coordinate");
        out.push((kinds, q));
    }
    out
}

fn exp_product(k: &[Rational]) -> DiffExpr {
    let atoms: Vec<CoeffAtom> = k
        .iter()
        .enumerate()
        .map(|(i, ki)| CoeffAtom::ExpX(i, ki.clone()))
        .collect();
    DiffExpr::atoms(&atoms).expect("exponentials merge")
}

fn exp_t(mu: &Rational) -> DiffExpr {
    DiffExpr::atom(&CoeffAtom::ExpT(mu.clone()))
}

fn check_dims(ks: &[Vec<Rational>], n: usize) -> Result<(), ConsLawError> {
    for k in ks {
        if k.len() != n {
            return Err(ConsLawError::WavevectorDim {
                expected: n,
                got: k.len(),
            });
        }
    }
    Ok(())
}

/// Exponent vectors of total degree `m` in `n` variables, in descending
/// lexicographic order (`x1²`, `x1 x2`, `x2²`, ...).
pub fn monomial_exponents(n: usize, m: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![m]];
    }
    let mut out = Vec::new();
    for first in (0..=m).rev() {
        for mut rest in monomial_exponents(n - 1, m - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn monomial(alpha: &[u32]) -> DiffExpr {
    let atoms: Vec<CoeffAtom> = alpha
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0)
        .map(|(i, &p)| CoeffAtom::XPower(i, p))
        .collect();
    DiffExpr::atoms(&atoms).expect("polynomial atoms always multiply")
}

/// Dimension of homogeneous harmonic polynomials of degree `m` in `n`
/// variables: `C(m+n-1, n-1) - C(m+n-3, n-1)`.
pub fn harmonic_dimension(n: usize, m: u32) -> usize {
    let n = n as u64;
    let m = m as u64;
    let all = binomial(m + n - 1, n - 1);
    let lower = if m >= 2 {
        binomial(m + n - 3, n - 1)
    } else {
        0
    };
    (all - lower) as usize
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(rows: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / &rows[r][c];
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let factor = rows[i][c].clone();
                let pivot_row = rows[r].clone();
                for (v, p) in rows[i].iter_mut().zip(&pivot_row) {
                    *v -= &factor * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Scales to coprime integers with a positive leading entry.
fn primitive(v: Vec<Rational>) -> Vec<Rational> {
    use num_integer::Integer;
    let lcm = v
        .iter()
        .fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<Rational> = v
        .iter()
        .map(|x| x * Rational::from_integer(lcm.clone()))
        .collect();
    let gcd = ints
        .iter()
        .fold(num_bigint::BigInt::zero(), |acc, x| acc.gcd(x.numer()));
    let lead_negative = ints
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative());
    let mut scale = Rational::from_integer(gcd);
    if lead_negative {
        scale = -scale;
    }
    ints.into_iter().map(|x| x / &scale).collect()
}

/// Null space of `Δ` restricted to homogeneous polynomials of degree `m`.
pub fn harmonic_homogeneous(n: usize, m: u32) -> Vec<DiffExpr> {
    let cols = monomial_exponents(n, m);
    if m < 2 {
        return cols.iter().map(|a| monomial(a)).collect();
    }
    let row_index: BTreeMap<Vec<u32>, usize> = monomial_exponents(n, m - 2)
        .into_iter()
        .enumerate()
        .map(|(i, a)| (a, i))
        .collect();
    let mut rows = vec![vec![Rational::zero(); cols.len()]; row_index.len()];
    for (c, alpha) in cols.iter().enumerate() {
        for i in 0..n {
            if alpha[i] >= 2 {
                let mut beta = alpha.clone();
                beta[i] -= 2;
                rows[row_index[&beta]][c] += int((alpha[i] * (alpha[i] - 1)) as i64);
            }
        }
    }
    let pivots = rref(&mut rows, cols.len());
    let mut basis = Vec::new();
    for free in (0..cols.len()).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols.len()];
        v[free] = Rational::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -rows[r][free].clone();
        }
        let v = primitive(v);
        let q: DiffExpr = cols
            .iter()
            .zip(&v)
            .filter(|(_, c)| !c.is_zero())
            .map(|(a, c)| monomial(a).scale(c))
            .sum();
        basis.push(q);
    }
    basis
}

fn case_i_basis(
    a: &Rational,
    c1: &Rational,
    c2: &Rational,
    n: usize,
    sel: &ModeSelector,
) -> Result<Vec<Characteristic>, ConsLawError> {
    let kind = sel.kind.unwrap_or(WaveKind::Trig);
    let mut out = Vec::new();
    let mut push = |q: DiffExpr,
                    spatial: Option<DiffExpr>,
                    mu: Option<Rational>,
                    mode: Mode|
     -> Result<(), ConsLawError> {
        let res = case_i_residual(&q, a, c1, c2, n);
        if !res.is_zero() {
            return Err(ConsLawError::BasisCheck(format!(
                "case I mode {mode} leaves residual {res}"
            )));
        }
        if !out.iter().any(|c: &Characteristic| c.q == q) {
            out.push(Characteristic {
                q,
                spatial,
                mu,
                case: CaseTag::I,
                mode,
            });
        }
        Ok(())
    };
    let wavevectors = match &sel.wavevectors {
        Some(ks) => {
            check_dims(ks, n)?;
            let mut ks: Vec<Vec<Rational>> = match kind {
                WaveKind::Trig => ks
                    .iter()
                    .map(|k| k.iter().map(|v| v.abs()).collect())
                    .collect(),
                WaveKind::Exponential => ks.clone(),
            };
            sort_wavevectors(&mut ks);
            ks
        }
        None => integer_wavevectors(n, sel.max_k2 as i64, false, kind == WaveKind::Trig),
    };
    for k in &wavevectors {
        let k2 = norm2(k);
        let k4 = &k2 * &k2;
        match kind {
            WaveKind::Trig => {
                let mu = -(a * &k4 - c1 * &k2 + c2);
                for (kinds, spatial) in trig_products(k) {
                    let q = &exp_t(&mu) * &spatial;
                    push(
                        q,
                        Some(spatial),
                        Some(mu.clone()),
                        Mode::Trig {
                            k: k.clone(),
                            kinds,
                        },
                    )?;
                }
            }
            WaveKind::Exponential => {
                let mu = -(a * &k4 + c1 * &k2 + c2);
                let spatial = exp_product(k);
                let q = &exp_t(&mu) * &spatial;
                push(
                    q,
                    Some(spatial),
                    Some(mu),
                    Mode::Exponential { k: k.clone() },
                )?;
            }
        }
    }
    if let Some(d) = sel.poly_degree {
        // Q = e^{-c2 t} exp(-t L) x^α with L = aΔ² + c1Δ, a finite series.
        for m in 0..=d {
            for alpha in monomial_exponents(n, m) {
                let mut term = monomial(&alpha);
                let mut series = DiffExpr::zero();
                let mut j = 0u32;
                while !term.is_zero() {
                    let tj = DiffExpr::atom(&CoeffAtom::TPower(j));
                    let sign = if j.is_multiple_of(2) { int(1) } else { int(-1) };
                    series = series + (&tj * &term).scale(&(sign / factorial(j)));
                    let lap = laplacian_coeff(&term, n);
                    term = laplacian_coeff(&lap, n).scale(a) + lap.scale(c1);
                    j += 1;
                }
                let q = &exp_t(&-c2.clone()) * &series;
                push(q, None, None, Mode::Polynomial { exponents: alpha })?;
            }
        }
    }
    Ok(out)
}

fn case_ii_basis(
    c2: &Rational,
    n: usize,
    sel: &ModeSelector,
) -> Result<Vec<Characteristic>, ConsLawError> {
    let degree = if n == 1 { 1 } else { sel.harmonic_degree };
    let mu = -c2.clone();
    let mut out = Vec::new();
    for m in 0..=degree {
        for (index, spatial) in harmonic_homogeneous(n, m).into_iter().enumerate() {
            let res = helmholtz_residual(&spatial, &Rational::zero(), n);
            if !res.is_zero() {
                return Err(ConsLawError::BasisCheck(format!(
                    "harmonic element {spatial} has Laplacian {res}"
                )));
            }
            out.push(Characteristic {
                q: &exp_t(&mu) * &spatial,
                spatial: Some(spatial),
                mu: Some(mu.clone()),
                case: CaseTag::II,
                mode: Mode::Harmonic { degree: m, index },
            });
        }
    }
    Ok(out)
}

fn case_iii_wavevectors(
    c4: &Rational,
    n: usize,
    kind: WaveKind,
) -> Result<Vec<Vec<Rational>>, ConsLawError> {
    let target = c4.abs();
    if n == 1 {
        return match rational_sqrt(&target) {
            Some(k) if kind == WaveKind::Trig => Ok(vec![vec![k]]),
            Some(k) => Ok(vec![vec![k.clone()], vec![-k]]),
            None => Err(ConsLawError::NoAdmissibleWavevector(format!(
                "|c4| = {target} has no rational square root; in one dimension the Helmholtz modes need k = sqrt(|c4|)"
            ))),
        };
    }
    let mut ks = if target.is_integer() {
        let bound = target.to_integer().try_into().unwrap_or(i64::MAX);
        integer_wavevectors(n, bound, true, kind == WaveKind::Trig)
    } else {
        Vec::new()
    };
    if ks.is_empty() {
        if let Some(k) = rational_sqrt(&target) {
            for i in 0..n {
                let mut v = vec![Rational::zero(); n];
                v[i] = k.clone();
                ks.push(v.clone());
                if kind == WaveKind::Exponential {
                    v[i] = -k.clone();
                    ks.push(v);
                }
            }
            sort_wavevectors(&mut ks);
        }
    }
    if ks.is_empty() {
        return Err(ConsLawError::NoAdmissibleWavevector(format!(
            "no integer vector has |k|² = {target}; pass explicit rational wavevectors with |k|² = {target}"
        )));
    }
    Ok(ks)
}

fn case_iii_basis(
    a: &Rational,
    c4: &Rational,
    c5: &Rational,
    n: usize,
    sel: &ModeSelector,
) -> Result<Vec<Characteristic>, ConsLawError> {
    let required = if c4.is_positive() {
        WaveKind::Trig
    } else {
        WaveKind::Exponential
    };
    if let Some(kind) = sel.kind {
        if kind != required {
            return Err(ConsLawError::NoAdmissibleWavevector(format!(
                "c4 = {c4} admits only {required} modes, {kind} requested"
            )));
        }
    }
    let target = c4.abs();
    let ks = match &sel.wavevectors {
        Some(ks) => {
            check_dims(ks, n)?;
            for k in ks {
                if norm2(k) != target {
                    return Err(ConsLawError::NoAdmissibleWavevector(format!(
                        "wavevector ({}) has |k|² = {}, need {target}",
                        k.iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                            .join(","),
                        norm2(k)
                    )));
                }
            }
            let mut ks: Vec<Vec<Rational>> = match required {
                WaveKind::Trig => ks
                    .iter()
                    .map(|k| k.iter().map(|v| v.abs()).collect())
                    .collect(),
                WaveKind::Exponential => ks.clone(),
            };
            sort_wavevectors(&mut ks);
            ks
        }
        None => case_iii_wavevectors(c4, n, required)?,
    };
    let lambda = c4 * c5 - a * c4 * c4;
    let mut out = Vec::new();
    let mut push = |spatial: DiffExpr, mode: Mode| -> Result<(), ConsLawError> {
        let res = helmholtz_residual(&spatial, c4, n);
        if !res.is_zero() {
            return Err(ConsLawError::BasisCheck(format!(
                "Helmholtz mode {spatial} leaves {res}"
            )));
        }
        out.push(Characteristic {
            q: &exp_t(&lambda) * &spatial,
            spatial: Some(spatial),
            mu: Some(lambda.clone()),
            case: CaseTag::III,
            mode,
        });
        Ok(())
    };
    for k in &ks {
        match required {
            WaveKind::Trig => {
                for (kinds, spatial) in trig_products(k) {
                    push(
                        spatial,
                        Mode::Trig {
                            k: k.clone(),
                            kinds,
                        },
                    )?;
                }
            }
            WaveKind::Exponential => push(exp_product(k), Mode::Exponential { k: k.clone() })?,
        }
    }
    Ok(out)
}

/// Characteristics for the classified case, each verified against its
/// defining linear equation before it is returned.
pub fn characteristic_basis(
    cls: &Classification,
    a: &Rational,
    n: usize,
    sel: &ModeSelector,
) -> Result<Vec<Characteristic>, ConsLawError> {
    match &cls.variant {
        Variant::CaseI { c1, c2, .. } => case_i_basis(a, c1, c2, n, sel),
        Variant::CaseII { c2, .. } => case_ii_basis(c2, n, sel),
        Variant::CaseIII { c4, c5 } => case_iii_basis(a, c4, c5, n, sel),
        _ => Err(ConsLawError::NoLaws(cls.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn e(s: &str) -> DiffExpr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn harmonic_degree_two_in_the_plane() {
        let all: Vec<DiffExpr> = (0..=2).flat_map(|m| harmonic_homogeneous(2, m)).collect();
        assert_eq!(
            all,
            vec![e("1"), e("x1"), e("x2"), e("x1*x2"), e("x1^2 - x2^2")]
        );
    }

    #[test]
    fn harmonic_counts_match_closed_form() {
        for n in 1..=4 {
            for m in 0..=5 {
                assert_eq!(
                    harmonic_homogeneous(n, m).len(),
                    harmonic_dimension(n, m),
                    "n={n} m={m}"
                );
            }
        }
        assert_eq!(harmonic_dimension(3, 3), 7);
        assert_eq!(harmonic_dimension(2, 7), 2);
    }

    #[test]
    fn enumerations() {
        assert_eq!(integer_wavevectors(2, 4, false, true).len(), 6);
        assert_eq!(integer_wavevectors(2, 2, true, false).len(), 4);
        let planar: Vec<_> = integer_wavevectors(2, 1, true, true);
        assert_eq!(planar, vec![vec![int(0), int(1)], vec![int(1), int(0)]]);
        assert_eq!(monomial_exponents(3, 2).len(), 6);
        assert_eq!(trig_products(&[int(1), int(0), int(2)]).len(), 4);
    }

    #[test]
    fn primitive_vectors() {
        let v = primitive(vec![
            Rational::new(int(-1).to_integer(), int(2).to_integer()),
            int(0),
            int(1),
        ]);
        assert_eq!(v, vec![int(1), int(0), int(-2)]);
    }
}
