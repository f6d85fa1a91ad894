//! Conservation laws `D_t T + Div X = Q (u_t - rhs)` for the three
//! admissible cases: characteristic bases, densities, fluxes and the exact
//! verifier.

mod basis;
pub mod tabulated;

use std::fmt;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

pub use basis::{
    case_i_residual, characteristic_basis, harmonic_dimension, harmonic_homogeneous,
    helmholtz_residual, monomial, monomial_exponents,
};

use crate::classify::{Classification, Variant};
use crate::expr::rational::fmt_rational;
use crate::expr::{DiffExpr, MultiIndex, Rational, TrigKind};
use crate::jet::{divergence, formal_t, laplacian_coeff, laplacian_u, rhs, JetError, PdeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsLawError {
    #[error("no conservation laws: {0}")]
    NoLaws(String),
    #[error("no admissible wavevector: {0}")]
    NoAdmissibleWavevector(String),
    #[error("wavevector has {got} components, expected {expected}")]
    WavevectorDim { expected: usize, got: usize },
    #[error("characteristic belongs to case {got}, classification is {expected}")]
    CaseMismatch { expected: String, got: CaseTag },
    #[error("characteristic must depend on t and x only, got {0}")]
    NotCoefficient(String),
    #[error("internal basis check failed: {0}")]
    BasisCheck(String),
    #[error(transparent)]
    Jet(#[from] JetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CaseTag {
    I,
    II,
    III,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::I => "I",
            CaseTag::II => "II",
            CaseTag::III => "III",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WaveKind {
    Trig,
    Exponential,
}

impl fmt::Display for WaveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveKind::Trig => "trig",
            WaveKind::Exponential => "exponential",
        })
    }
}

/// Where a characteristic came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mode {
    /// `Π trig(k_i x_i)`; `kinds[i]` is `None` where `k_i = 0`.
    Trig {
        k: Vec<Rational>,
        kinds: Vec<Option<TrigKind>>,
    },
    Exponential {
        k: Vec<Rational>,
    },
    /// Case I polynomial mode seeded by `x^α`.
    Polynomial {
        exponents: Vec<u32>,
    },
    Harmonic {
        degree: u32,
        index: usize,
    },
}

fn fmt_k(k: &[Rational]) -> String {
    let parts: Vec<String> = k.iter().map(fmt_rational).collect();
    format!("({})", parts.join(","))
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Trig { k, kinds } => {
                let kinds: Vec<&str> = kinds
                    .iter()
                    .map(|kd| match kd {
                        None => "-",
                        Some(TrigKind::Cos) => "cos",
                        Some(TrigKind::Sin) => "sin",
                    })
                    .collect();
                write!(f, "trig k={} [{}]", fmt_k(k), kinds.join(","))
            }
            Mode::Exponential { k } => write!(f, "exp k={}", fmt_k(k)),
            Mode::Polynomial { exponents } => {
                let e: Vec<String> = exponents.iter().map(|v| v.to_string()).collect();
                write!(f, "poly alpha=({})", e.join(","))
            }
            Mode::Harmonic { degree, index } => write!(f, "harmonic degree={degree} index={index}"),
        }
    }
}

impl Mode {
    pub fn wavevector(&self) -> Option<&[Rational]> {
        match self {
            Mode::Trig { k, .. } | Mode::Exponential { k } => Some(k),
            _ => None,
        }
    }
}

/// Which modes to generate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSelector {
    /// Explicit wavevectors; `None` enumerates the defaults.
    pub wavevectors: Option<Vec<Vec<Rational>>>,
    pub kind: Option<WaveKind>,
    /// Case I default enumeration bound on `|k|²`.
    pub max_k2: u32,
    /// Case I polynomial modes up to this degree.
    pub poly_degree: Option<u32>,
    /// Case II maximum harmonic degree.
    pub harmonic_degree: u32,
}

impl Default for ModeSelector {
    fn default() -> Self {
        ModeSelector {
            wavevectors: None,
            kind: None,
            max_k2: 4,
            poly_degree: None,
            harmonic_degree: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Characteristic {
    pub q: DiffExpr,
    /// `Q̃` when `Q = e^{μt} Q̃`.
    pub spatial: Option<DiffExpr>,
    pub mu: Option<Rational>,
    pub case: CaseTag,
    pub mode: Mode,
}

impl Characteristic {
    /// Wraps an arbitrary coefficient function, e.g. a hand-built linear
    /// combination of basis elements.
    pub fn custom(q: DiffExpr, case: CaseTag) -> Result<Self, ConsLawError> {
        if !q.is_coefficient_only() {
            return Err(ConsLawError::NotCoefficient(q.to_string()));
        }
        Ok(Characteristic {
            q,
            spatial: None,
            mu: None,
            case,
            mode: Mode::Polynomial {
                exponents: Vec::new(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsLaw {
    pub q: Characteristic,
    pub t: DiffExpr,
    pub x: Vec<DiffExpr>,
}

fn case_tag(cls: &Classification) -> Result<CaseTag, ConsLawError> {
    match cls.variant {
        Variant::CaseI { .. } => Ok(CaseTag::I),
        Variant::CaseII { .. } => Ok(CaseTag::II),
        Variant::CaseIII { .. } => Ok(CaseTag::III),
        _ => Err(ConsLawError::NoLaws(cls.to_string())),
    }
}

fn check_case(cls: &Classification, ch: &Characteristic) -> Result<(), ConsLawError> {
    let tag = case_tag(cls)?;
    if tag != ch.case {
        return Err(ConsLawError::CaseMismatch {
            expected: tag.to_string(),
            got: ch.case,
        });
    }
    if !ch.q.is_coefficient_only() {
        return Err(ConsLawError::NotCoefficient(ch.q.to_string()));
    }
    Ok(())
}

/// Case I shift `s` in `T = (u + s) Q`.
fn case_i_shift(c2: &Rational, c3: &Rational) -> Rational {
    if c2.is_zero() {
        Rational::zero()
    } else {
        c3 / c2
    }
}

/// `T = uQ` plus, in case I with `c2 != 0`, the constant shift `(c3/c2) Q`.
pub fn density(cls: &Classification, ch: &Characteristic) -> Result<DiffExpr, ConsLawError> {
    check_case(cls, ch)?;
    let mut t = &DiffExpr::u() * &ch.q;
    if let Variant::CaseI { c2, c3, .. } = &cls.variant {
        t = t + ch.q.scale(&case_i_shift(c2, c3));
    }
    Ok(t)
}

fn x_antiderivative(q: &DiffExpr) -> DiffExpr {
    q.antiderivative_x(0)
        .expect("characteristics are coefficient functions")
}

/// `D_{x_i} Δu = Σ_j u_{x_i x_j x_j}`.
fn laplacian_u_x(i: usize, n: usize) -> DiffExpr {
    (0..n)
        .map(|j| DiffExpr::jet(MultiIndex::from_coords(&[i, j, j])))
        .sum()
}

/// Flux making `D_t T + Div X = Q (u_t - rhs)` an identity.
pub fn flux(
    cls: &Classification,
    ch: &Characteristic,
    pde: &PdeSpec,
) -> Result<Vec<DiffExpr>, ConsLawError> {
    check_case(cls, ch)?;
    let n = pde.n;
    let a = &pde.a;
    let q = &ch.q;
    let u = DiffExpr::u();
    let lap_u = laplacian_u(n);
    let lap_q = laplacian_coeff(q, n);
    // a(∂_iQ Δu − Q (Δu)_i) appears in every case.
    let fourth =
        |i: usize| -> DiffExpr { (&q.partial_x(i) * &lap_u - q * &laplacian_u_x(i, n)).scale(a) };
    let mut out = Vec::with_capacity(n);
    match &cls.variant {
        Variant::CaseI { c1, c3, c2 } => {
            let v = &u + &DiffExpr::constant(case_i_shift(c2, c3));
            for i in 0..n {
                let dq = q.partial_x(i);
                let ui = DiffExpr::ux(i);
                let second = &v * &dq - &ui * q;
                let lap_part = &v * &lap_q.partial_x(i) - &ui * &lap_q;
                let mut xi = second.scale(c1) + lap_part.scale(a) + fourth(i);
                if c2.is_zero() && i == 0 && !c3.is_zero() {
                    xi = xi - x_antiderivative(q).scale(c3);
                }
                out.push(xi);
            }
        }
        Variant::CaseII { c3, .. } => {
            let b = &pde.b;
            let b_tilde = b.antiderivative();
            for i in 0..n {
                let dq = q.partial_x(i);
                let mut xi =
                    fourth(i) - (q * &DiffExpr::ux(i)).mul_upoly(b) + dq.mul_upoly(&b_tilde);
                if i == 0 && !c3.is_zero() {
                    xi = xi - x_antiderivative(q).scale(c3);
                }
                out.push(xi);
            }
        }
        Variant::CaseIII { c4, c5 } => {
            let dg = pde.g.derivative();
            let inv = Rational::from_integer(1.into()) / c4;
            for i in 0..n {
                let dq = q.partial_x(i);
                let ui = DiffExpr::ux(i);
                let qui = q * &ui;
                let udq = &u * &dq;
                let xi = fourth(i) + (&qui - &udq).scale(&(a * c4))
                    - qui.mul_upoly(&dg).scale(&inv)
                    - qui.scale(c5)
                    + dq.mul_upoly(&pde.g).scale(&inv)
                    + udq.scale(c5);
                out.push(xi);
            }
        }
        _ => unreachable!("check_case admits only cases I-III"),
    }
    Ok(out)
}

impl ConsLaw {
    pub fn build(
        cls: &Classification,
        ch: Characteristic,
        pde: &PdeSpec,
    ) -> Result<Self, ConsLawError> {
        let t = density(cls, &ch)?;
        let x = flux(cls, &ch, pde)?;
        Ok(ConsLaw { q: ch, t, x })
    }
}

/// All laws for a classification and selector.
pub fn conservation_laws(
    cls: &Classification,
    pde: &PdeSpec,
    sel: &ModeSelector,
) -> Result<Vec<ConsLaw>, ConsLawError> {
    characteristic_basis(cls, &pde.a, pde.n, sel)?
        .into_iter()
        .map(|ch| ConsLaw::build(cls, ch, pde))
        .collect()
}

/// `formal_t(T) + Div X - Q (u_t - rhs)`; zero iff the law holds.
pub fn verify_identity(pde: &PdeSpec, cl: &ConsLaw) -> Result<DiffExpr, ConsLawError> {
    identity_residual(pde, &cl.q.q, &cl.t, &cl.x)
}

pub fn identity_residual(
    pde: &PdeSpec,
    q: &DiffExpr,
    t: &DiffExpr,
    x: &[DiffExpr],
) -> Result<DiffExpr, ConsLawError> {
    let balance = q * &(DiffExpr::ut() - rhs(pde));
    Ok(formal_t(t)? + divergence(x, pde.n)? - balance)
}

/// Left side of the characteristic condition for `Q = Q(t, x)`:
/// `Q_t + aΣ∂⁴Q + (2b' - 2f)Σ(u_ii Q + u_i ∂_iQ) + (b'' - f')Σu_i² Q + g'Q + bΔQ`.
pub fn determining_residual(pde: &PdeSpec, q: &DiffExpr) -> Result<DiffExpr, ConsLawError> {
    if !q.is_coefficient_only() {
        return Err(ConsLawError::NotCoefficient(q.to_string()));
    }
    let n = pde.n;
    let db = pde.b.derivative();
    let k1 = &db.scale(&Rational::from_integer(2.into()))
        - &pde.f.scale(&Rational::from_integer(2.into()));
    let k2 = &db.derivative() - &pde.f.derivative();
    let lap_q = laplacian_coeff(q, n);
    let mut first = DiffExpr::zero();
    let mut squares = DiffExpr::zero();
    for i in 0..n {
        let ui = DiffExpr::ux(i);
        first =
            first + &DiffExpr::jet(MultiIndex::from_coords(&[i, i])) * q + &ui * &q.partial_x(i);
        squares = squares + &(&ui * &ui) * q;
    }
    Ok(q.partial_t()
        + laplacian_coeff(&lap_q, n).scale(&pde.a)
        + first.mul_upoly(&k1)
        + squares.mul_upoly(&k2)
        + q.mul_upoly(&pde.g.derivative())
        + lap_q.mul_upoly(&pde.b))
}

pub fn is_trivial(cl: &ConsLaw) -> bool {
    cl.q.q.is_zero()
}

/// Coefficient functions used to probe nonexistence: `1`, `x_i`, `x_i x_j`,
/// `e^{μt}` and low trig modes.
pub fn probe_family(n: usize) -> Vec<DiffExpr> {
    use crate::expr::CoeffAtom;
    let mut out = vec![DiffExpr::one()];
    for i in 0..n {
        out.push(DiffExpr::x(i));
    }
    for i in 0..n {
        for j in i..n {
            out.push(&DiffExpr::x(i) * &DiffExpr::x(j));
        }
    }
    for mu in [-2i64, -1, 1, 3] {
        out.push(DiffExpr::atom(&CoeffAtom::ExpT(Rational::from_integer(
            mu.into(),
        ))));
    }
    for i in 0..n {
        for k in 1..=2i64 {
            for kind in [TrigKind::Cos, TrigKind::Sin] {
                out.push(DiffExpr::atom(&CoeffAtom::Trig(
                    i,
                    kind,
                    Rational::from_integer(k.into()),
                )));
            }
        }
    }
    out
}

/// Printable record of one law and its checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub index: usize,
    pub case: CaseTag,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<String>,
    pub q: String,
    pub t: String,
    pub x: Vec<String>,
    pub identity_residual: String,
    pub determining_residual: String,
    pub density_link: String,
    pub verified: bool,
    /// Whether the tabulated closed-form flux also passes the identity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tabulated_verified: Option<bool>,
}

impl LawReport {
    pub fn new(
        index: usize,
        cls: &Classification,
        pde: &PdeSpec,
        cl: &ConsLaw,
    ) -> Result<Self, ConsLawError> {
        let identity = verify_identity(pde, cl)?;
        let determining = determining_residual(pde, &cl.q.q)?;
        let link = cl.t.partial_u() - cl.q.q.clone();
        let tabulated_verified = match tabulated::law(cls, &cl.q, pde)? {
            Some(tab) => Some(verify_identity(pde, &tab)?.is_zero()),
            None => None,
        };
        Ok(LawReport {
            index,
            case: cl.q.case,
            mode: cl.q.mode.to_string(),
            mu: cl.q.mu.as_ref().map(fmt_rational),
            q: cl.q.q.to_string(),
            t: cl.t.to_string(),
            x: cl.x.iter().map(|x| x.to_string()).collect(),
            verified: identity.is_zero() && determining.is_zero() && link.is_zero(),
            identity_residual: identity.to_string(),
            determining_residual: determining.to_string(),
            density_link: link.to_string(),
            tabulated_verified,
        })
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "law {} (case {}, {})", self.index, self.case, self.mode)?;
        writeln!(f, "  Q  = {}", self.q)?;
        writeln!(f, "  T  = {}", self.t)?;
        for (i, x) in self.x.iter().enumerate() {
            writeln!(f, "  X{} = {}", i + 1, x)?;
        }
        write!(
            f,
            "  identity residual = {}, determining residual = {}\n  verified: {}",
            self.identity_residual,
            self.determining_residual,
            if self.verified { "yes" } else { "no" }
        )?;
        if let Some(tab) = self.tabulated_verified {
            write!(
                f,
                "\n  tabulated flux verifies: {}",
                if tab { "yes" } else { "no" }
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
