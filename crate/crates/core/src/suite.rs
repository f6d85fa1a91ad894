//! Randomized exact checks of the symbolic layer: ring laws, printer round
//! trips, total-derivative identities, Euler annihilation of divergences and
//! the conservation-law identity for generated laws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::{classify, preset, Preset};
use crate::conslaw::{
    conservation_laws, determining_residual, verify_identity, ConsLaw, ModeSelector,
};
use crate::expr::rational::{int, rat};
use crate::expr::{parse_expr, parse_upoly, CoeffAtom, DiffExpr, MultiIndex, Rational, TrigKind};
use crate::jet::{divergence, euler, formal_t, rhs, total_t, total_x, PdeSpec};

/// Shape of randomly generated expressions.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub n: usize,
    pub max_order: u32,
    pub max_terms: usize,
    pub waves: Waves,
}

/// x-dependence beyond powers. Trig factors only multiply `Waves::None`
/// partners, the one pairing that never leaves the coefficient class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Waves {
    None,
    Exp,
    Trig,
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num = rng.gen_range(-5i64..=5);
    let den = rng.gen_range(1i64..=3);
    if num == 0 {
        int(1)
    } else {
        rat(num, den)
    }
}

fn random_atom(rng: &mut ChaCha8Rng, shape: &Shape) -> CoeffAtom {
    let i = rng.gen_range(0..shape.n);
    let k = int(rng.gen_range(1i64..=2));
    let kinds = if shape.waves == Waves::None { 3 } else { 5 };
    match rng.gen_range(0..kinds) {
        0 => CoeffAtom::TPower(rng.gen_range(1..=2)),
        1 => CoeffAtom::XPower(i, rng.gen_range(1..=2)),
        2 => CoeffAtom::ExpT(small_rational(rng)),
        3 if shape.waves == Waves::Exp => {
            CoeffAtom::ExpX(i, if rng.gen_bool(0.5) { k } else { -k })
        }
        3 => CoeffAtom::Trig(i, TrigKind::Cos, k),
        _ if shape.waves == Waves::Exp => CoeffAtom::ExpX(i, k),
        _ => CoeffAtom::Trig(i, TrigKind::Sin, k),
    }
}

fn random_jet(rng: &mut ChaCha8Rng, shape: &Shape) -> MultiIndex {
    let order = rng.gen_range(1..=shape.max_order);
    let coords: Vec<usize> = (0..order).map(|_| rng.gen_range(0..shape.n)).collect();
    MultiIndex::from_coords(&coords)
}

/// One random monomial-sum; every product stays in the class because each
/// term carries at most one trig factor per coordinate.
pub fn random_expr(rng: &mut ChaCha8Rng, shape: &Shape) -> DiffExpr {
    let terms = rng.gen_range(1..=shape.max_terms);
    let mut out = DiffExpr::zero();
    for _ in 0..terms {
        let mut atoms = Vec::new();
        let mut used_trig = vec![false; shape.n];
        for _ in 0..rng.gen_range(0..=2) {
            let a = random_atom(rng, shape);
            if let CoeffAtom::Trig(i, ..) = a {
                if used_trig[i] {
                    continue;
                }
                used_trig[i] = true;
            }
            atoms.push(a);
        }
        let mut term = DiffExpr::atoms(&atoms).unwrap_or_else(|_| DiffExpr::one());
        let u_part = match rng.gen_range(0..4) {
            0 => DiffExpr::one(),
            1 => DiffExpr::u(),
            2 => &DiffExpr::u() * &DiffExpr::u(),
            _ => DiffExpr::from_upoly(&crate::expr::UPoly::term(int(1), 0, small_rational(rng))),
        };
        term = &term * &u_part;
        for _ in 0..rng.gen_range(0..=2) {
            term = &term * &DiffExpr::jet(random_jet(rng, shape));
        }
        out.add_scaled(&term, &small_rational(rng));
    }
    out
}

fn random_t_shape(rng: &mut ChaCha8Rng, shape: &Shape) -> DiffExpr {
    let flat = Shape {
        max_order: 1,
        ..*shape
    };
    let e = random_expr(rng, &flat);
    DiffExpr::from_terms(
        e.terms()
            .filter(|(m, _)| m.jets.is_empty())
            .map(|(m, c)| (c.clone(), m.clone())),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult {
            name: name.to_string(),
            cases: 0,
            failures: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(detail());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn shapes(rng: &mut ChaCha8Rng, waves: Waves) -> Shape {
    Shape {
        n: rng.gen_range(1..=3),
        max_order: rng.gen_range(1..=3),
        max_terms: 3,
        waves,
    }
}

fn any_shape(rng: &mut ChaCha8Rng) -> Shape {
    let waves = if rng.gen_bool(0.5) {
        Waves::Trig
    } else {
        Waves::Exp
    };
    shapes(rng, waves)
}

/// A shape for multiplicands and a shape for the last factor, always
/// closed under products with each other.
fn partner_shapes(rng: &mut ChaCha8Rng) -> (Shape, Shape) {
    let base = shapes(rng, Waves::None);
    if rng.gen_bool(0.5) {
        (
            Shape {
                waves: Waves::Exp,
                ..base
            },
            Shape {
                waves: Waves::Exp,
                ..base
            },
        )
    } else {
        (
            base,
            Shape {
                waves: Waves::Trig,
                ..base
            },
        )
    }
}

pub fn ring_laws(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteResult::new("ring laws");
    for _ in 0..cases {
        let (plain, last) = partner_shapes(&mut rng);
        let a = random_expr(&mut rng, &plain);
        let b = random_expr(&mut rng, &plain);
        let c = random_expr(&mut rng, &last);
        r.check(&a * &b == &b * &a, || {
            format!("a*b != b*a for a = {a}, b = {b}")
        });
        r.check(&(&a * &b) * &c == &a * &(&b * &c), || {
            format!("associativity: {a} | {b} | {c}")
        });
        r.check(&a * &(&b + &c) == &(&a * &b) + &(&a * &c), || {
            format!("distributivity: {a} | {b} | {c}")
        });
        r.check((&c + &(-&c)).is_zero(), || format!("c - c != 0 for {c}"));
    }
    r
}

pub fn print_parse(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteResult::new("print/parse round trip");
    for _ in 0..cases {
        let shape = any_shape(&mut rng);
        let e = random_expr(&mut rng, &shape);
        let text = e.to_string();
        let back = parse_expr(&text);
        r.check(back.as_ref() == Ok(&e), || match &back {
            Ok(b) => format!("{text} reparsed as {b}"),
            Err(err) => format!("{text} does not reparse: {err}"),
        });
    }
    r
}

pub fn derivative_laws(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteResult::new("total derivatives");
    for _ in 0..cases {
        let (plain, last) = partner_shapes(&mut rng);
        let a = random_expr(&mut rng, &plain);
        let b = random_expr(&mut rng, &last);
        let i = rng.gen_range(0..plain.n);
        let j = rng.gen_range(0..plain.n);
        r.check(
            total_x(&total_x(&a, i), j) == total_x(&total_x(&a, j), i),
            || format!("D{i} D{j} != D{j} D{i} on {a}"),
        );
        let lhs = total_x(&(&a * &b), i);
        let rhs_ = &total_x(&a, i) * &b + &a * &total_x(&b, i);
        r.check(lhs == rhs_, || format!("Leibniz fails on {a} | {b}"));
        let c = small_rational(&mut rng);
        r.check(
            total_x(&(&a + &b.scale(&c)), i) == total_x(&a, i) + total_x(&b, i).scale(&c),
            || format!("linearity fails on {a} | {b}"),
        );
    }
    r
}

pub fn euler_annihilation(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteResult::new("Euler annihilates divergences");
    for _ in 0..cases {
        let shape = any_shape(&mut rng);
        let flux: Vec<DiffExpr> = (0..shape.n)
            .map(|_| random_expr(&mut rng, &shape))
            .collect();
        let div = divergence(&flux, shape.n).expect("n components");
        let e = euler(&div);
        r.check(e.is_zero(), || {
            let xs: Vec<String> = flux.iter().map(|x| x.to_string()).collect();
            format!("E(Div X) = {e} for X = ({})", xs.join(", "))
        });
    }
    r
}

fn suite_pdes(n: usize) -> Vec<PdeSpec> {
    let p = |a: i64, b: &str, f: Option<&str>, g: &str| {
        PdeSpec::new(
            int(a),
            parse_upoly(b).expect("fixed input"),
            f.map(|s| parse_upoly(s).expect("fixed input")),
            parse_upoly(g).expect("fixed input"),
            n,
        )
        .expect("nonzero a")
    };
    vec![
        p(-1, "0", Some("0"), "0"),
        p(1, "2", Some("0"), "-3*u + 2"),
        p(2, "-1", Some("0"), "5"),
        preset(
            &Preset::CahnHilliard {
                c1: int(1),
                c2: int(1),
            },
            n,
        )
        .expect("preset"),
        p(1, "u^2 + exp(u)", None, "2*u - 5"),
        preset(&Preset::KuramotoSivashinsky, n).expect("preset"),
        p(1, "u + 1", None, "u^2"),
        p(1, "1/2*exp(2*u) + 3", None, "exp(2*u)"),
        p(1, "-u^2", None, "1/3*u^3"),
    ]
}

/// Generated laws for a fixed family of equations, `n = 1..=3`.
pub fn sample_laws() -> Vec<(PdeSpec, Vec<ConsLaw>)> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for pde in suite_pdes(n) {
            let cls = classify(&pde).expect("classifiable");
            if !cls.admits_laws() {
                continue;
            }
            let sel = ModeSelector {
                harmonic_degree: 2,
                max_k2: 2,
                ..Default::default()
            };
            // Some case III constants have no rational mode in low dimension.
            if let Ok(laws) = conservation_laws(&cls, &pde, &sel) {
                out.push((pde, laws));
            }
        }
    }
    out
}

/// Checks the identity, the determining equation and `∂T/∂u = Q`.
pub fn law_identities(groups: &[(PdeSpec, Vec<ConsLaw>)]) -> SuiteResult {
    let mut r = SuiteResult::new("conservation-law identities");
    for (pde, laws) in groups {
        for cl in laws {
            match verify_identity(pde, cl) {
                Ok(res) => r.check(res.is_zero(), || {
                    format!("identity residual {res} for T = {}", cl.t)
                }),
                Err(e) => r.check(false, || e.to_string()),
            }
            match determining_residual(pde, &cl.q.q) {
                Ok(res) => r.check(res.is_zero(), || {
                    format!("determining residual {res} for Q = {}", cl.q.q)
                }),
                Err(e) => r.check(false, || e.to_string()),
            }
            let link = cl.t.partial_u() - cl.q.q.clone();
            r.check(link.is_zero(), || format!("dT/du - Q = {link}"));
        }
    }
    if r.cases == 0 {
        r.warnings.push("no conservation laws to verify".into());
    }
    r
}

/// `total_t(T) = formal_t(T)` with `u_t` replaced by the right-hand side.
pub fn on_shell_consistency(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = SuiteResult::new("on-shell time derivative");
    for _ in 0..cases {
        let shape = any_shape(&mut rng);
        let pdes = suite_pdes(shape.n);
        let pde = &pdes[rng.gen_range(0..pdes.len())];
        let t = random_t_shape(&mut rng, &shape);
        let formal = formal_t(&t).expect("T-shape").substitute_ut(&rhs(pde));
        r.check(formal == total_t(&t, pde), || {
            format!("D_t mismatch on {t}")
        });
    }
    r
}

pub fn default_suite(seed: u64, cases: usize) -> Vec<SuiteResult> {
    vec![
        ring_laws(seed, cases),
        print_parse(seed.wrapping_add(1), cases),
        derivative_laws(seed.wrapping_add(2), cases),
        euler_annihilation(seed.wrapping_add(3), cases),
        on_shell_consistency(seed.wrapping_add(4), cases),
        law_identities(&sample_laws()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        for r in default_suite(7, 120) {
            assert!(
                r.passed(),
                "{}: {:?}",
                r.name,
                &r.failures[..r.failures.len().min(3)]
            );
            assert!(r.cases >= 100, "{} ran {}", r.name, r.cases);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let shape = Shape {
            n: 2,
            max_order: 3,
            max_terms: 3,
            waves: Waves::Trig,
        };
        let a = random_expr(&mut ChaCha8Rng::seed_from_u64(3), &shape);
        let b = random_expr(&mut ChaCha8Rng::seed_from_u64(3), &shape);
        assert_eq!(a, b);
    }

    #[test]
    fn broken_law_is_reported() {
        let mut groups = sample_laws();
        let x0 = &mut groups[0].1[0].x[0];
        *x0 = x0.scale(&int(-1));
        let r = law_identities(&groups);
        assert!(!r.passed());
        assert!(law_identities(&[]).warnings.len() == 1);
    }
}
