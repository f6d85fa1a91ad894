//! Decision procedure for the existence of nontrivial local conservation
//! laws, with extraction of the case constants.

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::expr::rational::{fmt_rational, parse_rational};
use crate::expr::{parse_upoly, ExprError, Rational, UPoly};
use crate::jet::{JetError, PdeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error(
        "unknown preset '{0}' (expected cahn-hilliard, kuramoto-sivashinsky or generalized-ch)"
    )]
    UnknownPreset(String),
    #[error("preset '{name}' expects {expected} parameter(s), got {got}")]
    ParamCount {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("parameter '{0}' is not an exact rational")]
    BadParam(String),
    #[error("cahn-hilliard needs c1*c2 != 0 (the fourth-order coefficient would vanish)")]
    DegenerateCahnHilliard,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Jet(#[from] JetError),
    /// Raised only if exact arithmetic contradicts itself.
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

/// `f` used when none is given: `db/du`.
pub fn default_f(b: &UPoly) -> UPoly {
    b.derivative()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "variant")]
pub enum Variant {
    /// `f != db/du`.
    NoCl1,
    /// `f = 0`, `b` constant, `g'' != 0`.
    NoCl2,
    /// `f = b' != 0`, `g'' != 0`, `g''' b' - g'' b'' != 0`.
    NoCl3,
    CaseI {
        #[serde(serialize_with = "crate::jet::ser_rational")]
        c1: Rational,
        #[serde(serialize_with = "crate::jet::ser_rational")]
        c2: Rational,
        #[serde(serialize_with = "crate::jet::ser_rational")]
        c3: Rational,
    },
    CaseII {
        #[serde(serialize_with = "crate::jet::ser_rational")]
        c2: Rational,
        #[serde(serialize_with = "crate::jet::ser_rational")]
        c3: Rational,
    },
    CaseIII {
        #[serde(serialize_with = "crate::jet::ser_rational")]
        c4: Rational,
        #[serde(serialize_with = "crate::jet::ser_rational")]
        c5: Rational,
    },
}

/// A condition residual evaluated while walking the decision tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub label: String,
    pub value: UPoly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub variant: Variant,
    pub witnesses: Vec<Witness>,
}

impl Classification {
    pub fn admits_laws(&self) -> bool {
        matches!(
            self.variant,
            Variant::CaseI { .. } | Variant::CaseII { .. } | Variant::CaseIII { .. }
        )
    }

    /// `"condition 1"`, ..., `"case III"`.
    pub fn case_label(&self) -> &'static str {
        match self.variant {
            Variant::NoCl1 => "condition 1",
            Variant::NoCl2 => "condition 2",
            Variant::NoCl3 => "condition 3",
            Variant::CaseI { .. } => "case I",
            Variant::CaseII { .. } => "case II",
            Variant::CaseIII { .. } => "case III",
        }
    }

    pub fn witness(&self, label: &str) -> Option<&UPoly> {
        self.witnesses
            .iter()
            .find(|w| w.label == label)
            .map(|w| &w.value)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = fmt_rational;
        match &self.variant {
            Variant::NoCl1 => f.write_str("NoCL: condition 1 (f ≠ ∂b/∂u)"),
            Variant::NoCl2 => f.write_str("NoCL: condition 2 (f = 0, b constant, ∂²g/∂u² ≠ 0)"),
            Variant::NoCl3 => f.write_str(
                "NoCL: condition 3 (f = ∂b/∂u ≠ 0, ∂²g/∂u² ≠ 0, ∂³g/∂u³·∂b/∂u − ∂²g/∂u²·∂²b/∂u² ≠ 0)",
            ),
            Variant::CaseI { c1, c2, c3 } => {
                write!(f, "Case I, c₁={}, c₂={}, c₃={}", r(c1), r(c2), r(c3))
            }
            Variant::CaseII { c2, c3 } => write!(f, "Case II, c₂={}, c₃={}", r(c2), r(c3)),
            Variant::CaseIII { c4, c5 } => write!(f, "Case III, c₄={}, c₅={}", r(c4), r(c5)),
        }
    }
}

pub const W_F_MINUS_DB: &str = "f - db/du";
pub const W_DB: &str = "db/du";
pub const W_D2G: &str = "d2g/du2";
pub const W_CROSS: &str = "d3g/du3*db/du - d2g/du2*d2b/du2";
pub const W_RECONSTRUCT: &str = "b - (dg/du/c4 + c5)";

/// Walks the decision tree and returns exactly one variant.
pub fn classify(pde: &PdeSpec) -> Result<Classification, ClassifyError> {
    let mut witnesses = Vec::new();
    let mut note = |label: &str, value: &UPoly| {
        witnesses.push(Witness {
            label: label.to_string(),
            value: value.clone(),
        })
    };
    let db = pde.b.derivative();
    let f_res = &pde.f - &db;
    note(W_F_MINUS_DB, &f_res);
    if !f_res.is_zero() {
        return Ok(Classification {
            variant: Variant::NoCl1,
            witnesses,
        });
    }
    note(W_DB, &db);
    let g1 = pde.g.derivative();
    let g2 = g1.derivative();
    note(W_D2G, &g2);

    let affine_g = |g1: &UPoly| -> Result<(Rational, Rational), ClassifyError> {
        let c2 = g1
            .as_constant()
            .ok_or_else(|| ClassifyError::Inconsistent("g'' = 0 but g' is not constant".into()))?;
        Ok((c2, pde.g.eval_at_zero()))
    };

    if db.is_zero() {
        let variant = if g2.is_zero() {
            let c1 = pde.b.as_constant().ok_or_else(|| {
                ClassifyError::Inconsistent("b' = 0 but b is not constant".into())
            })?;
            let (c2, c3) = affine_g(&g1)?;
            Variant::CaseI { c1, c2, c3 }
        } else {
            Variant::NoCl2
        };
        return Ok(Classification { variant, witnesses });
    }

    if g2.is_zero() {
        let (c2, c3) = affine_g(&g1)?;
        return Ok(Classification {
            variant: Variant::CaseII { c2, c3 },
            witnesses,
        });
    }

    let cross = &(&g2.derivative() * &db) - &(&g2 * &db.derivative());
    note(W_CROSS, &cross);
    if !cross.is_zero() {
        return Ok(Classification {
            variant: Variant::NoCl3,
            witnesses,
        });
    }
    let c4 = g2.ratio_to(&db).ok_or_else(|| {
        ClassifyError::Inconsistent(format!(
            "g'''b' = g''b'' holds but g''/b' = ({g2})/({db}) is not constant"
        ))
    })?;
    if c4.is_zero() {
        return Err(ClassifyError::Inconsistent("g'' != 0 but c4 = 0".into()));
    }
    let shifted = &pde.b - &g1.scale(&(Rational::one() / &c4));
    let c5 = shifted.as_constant().ok_or_else(|| {
        ClassifyError::Inconsistent(format!("b - g'/c4 = {shifted} is not constant"))
    })?;
    let rebuilt = &g1.scale(&(Rational::one() / &c4)) + &UPoly::constant(c5.clone());
    note(W_RECONSTRUCT, &(&pde.b - &rebuilt));
    Ok(Classification {
        variant: Variant::CaseIII { c4, c5 },
        witnesses,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Preset {
    /// `u_t = c1 Δ(u³ - u + c2 Δu)`.
    CahnHilliard { c1: Rational, c2: Rational },
    /// `u_t + Δ²u + Δu + |∇u|²/2 = 0`.
    KuramotoSivashinsky,
    /// `u_t + Δ²u - Δ f̃(u) + g̃(u) = 0`.
    GeneralizedCh { f_tilde: UPoly, g_tilde: UPoly },
}

pub fn preset(p: &Preset, n: usize) -> Result<PdeSpec, ClassifyError> {
    let spec = match p {
        Preset::CahnHilliard { c1, c2 } => {
            let a = c1 * c2;
            if a.is_zero() {
                return Err(ClassifyError::DegenerateCahnHilliard);
            }
            let b = parse_upoly("3*u^2 - 1")?.scale(c1);
            let f = parse_upoly("6*u")?.scale(c1);
            PdeSpec::new(a, b, Some(f), UPoly::zero(), n)?
        }
        Preset::KuramotoSivashinsky => PdeSpec::new(
            -Rational::one(),
            UPoly::constant(-Rational::one()),
            Some(parse_upoly("-1/2")?),
            UPoly::zero(),
            n,
        )?,
        Preset::GeneralizedCh { f_tilde, g_tilde } => {
            let b = f_tilde.derivative();
            let f = b.derivative();
            PdeSpec::new(-Rational::one(), b, Some(f), -g_tilde, n)?
        }
    };
    Ok(spec)
}

/// String front end: `cahn-hilliard` takes `c1, c2`; `generalized-ch`
/// takes the expressions `f̃, g̃`; `kuramoto-sivashinsky` takes nothing.
pub fn preset_by_name(name: &str, params: &[String], n: usize) -> Result<PdeSpec, ClassifyError> {
    let want = |expected: usize| -> Result<(), ClassifyError> {
        if params.len() == expected {
            Ok(())
        } else {
            Err(ClassifyError::ParamCount {
                name: name.to_string(),
                expected,
                got: params.len(),
            })
        }
    };
    let rational = |s: &String| parse_rational(s).ok_or_else(|| ClassifyError::BadParam(s.clone()));
    let p = match name {
        "cahn-hilliard" | "ch" => {
            want(2)?;
            Preset::CahnHilliard {
                c1: rational(&params[0])?,
                c2: rational(&params[1])?,
            }
        }
        "kuramoto-sivashinsky" | "ks" => {
            want(0)?;
            Preset::KuramotoSivashinsky
        }
        "generalized-ch" | "gch" => {
            want(2)?;
            Preset::GeneralizedCh {
                f_tilde: parse_upoly(&params[0])?,
                g_tilde: parse_upoly(&params[1])?,
            }
        }
        other => return Err(ClassifyError::UnknownPreset(other.to_string())),
    };
    preset(&p, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rational::int;

    fn spec(a: i64, b: &str, f: Option<&str>, g: &str) -> PdeSpec {
        PdeSpec::new(
            int(a),
            parse_upoly(b).unwrap(),
            f.map(|s| parse_upoly(s).unwrap()),
            parse_upoly(g).unwrap(),
            1,
        )
        .unwrap()
    }

    fn variant(p: &PdeSpec) -> Variant {
        classify(p).unwrap().variant
    }

    #[test]
    fn named_examples() {
        let ks = preset(&Preset::KuramotoSivashinsky, 1).unwrap();
        assert_eq!(variant(&ks), Variant::NoCl1);
        let ch = spec(1, "3*u^2 - 1", Some("6*u"), "0");
        assert_eq!(
            variant(&ch),
            Variant::CaseII {
                c2: int(0),
                c3: int(0)
            }
        );
        assert_eq!(
            variant(&spec(1, "2", Some("0"), "3*u + 1")),
            Variant::CaseI {
                c1: int(2),
                c2: int(3),
                c3: int(1)
            }
        );
        assert_eq!(variant(&spec(1, "1", Some("0"), "u^2")), Variant::NoCl2);
        assert_eq!(
            variant(&spec(1, "u + 1", Some("1"), "u^2")),
            Variant::CaseIII {
                c4: int(2),
                c5: int(1)
            }
        );
        assert_eq!(
            variant(&spec(1, "u", Some("1"), "u^3 + u^2")),
            Variant::NoCl3
        );
    }

    #[test]
    fn case_iii_constants_rebuild_b() {
        let p = spec(1, "u + 1", None, "u^2");
        let c = classify(&p).unwrap();
        let Variant::CaseIII { c4, c5 } = &c.variant else {
            panic!()
        };
        // oracle: substitute back into b = g'/c4 + c5 and compare exactly
        let rebuilt =
            &p.g.derivative().scale(&(Rational::one() / c4)) + &UPoly::constant(c5.clone());
        assert_eq!(rebuilt, p.b);
        assert!(c.witness(W_RECONSTRUCT).unwrap().is_zero());
    }

    #[test]
    fn exponential_case_iii() {
        // g = exp(2u): g'' = 4 e^{2u}, b = g'/4 + 3 = e^{2u}/2 + 3
        let p = spec(-1, "1/2*exp(2*u) + 3", None, "exp(2*u)");
        assert_eq!(
            variant(&p),
            Variant::CaseIII {
                c4: int(4),
                c5: int(3)
            }
        );
    }

    #[test]
    fn syntactic_variants_of_f_agree() {
        let p1 = spec(1, "3*u^2 - 1", Some("6*u"), "0");
        let p2 = spec(1, "3*u^2 - 1", Some("2*3*u"), "0");
        assert_eq!(variant(&p1), variant(&p2));
    }

    #[test]
    fn free_linear_equation_is_case_i() {
        let p = spec(1, "0", Some("0"), "0");
        assert_eq!(
            variant(&p),
            Variant::CaseI {
                c1: int(0),
                c2: int(0),
                c3: int(0)
            }
        );
    }

    #[test]
    fn witness_for_condition_1() {
        let ks = preset(&Preset::KuramotoSivashinsky, 1).unwrap();
        let c = classify(&ks).unwrap();
        assert_eq!(
            c.witness(W_F_MINUS_DB).unwrap(),
            &parse_upoly("-1/2").unwrap()
        );
        assert_eq!(c.to_string(), "NoCL: condition 1 (f ≠ ∂b/∂u)");
    }

    #[test]
    fn default_f_examples() {
        assert_eq!(
            default_f(&parse_upoly("3*u^2 - 1").unwrap()),
            parse_upoly("6*u").unwrap()
        );
        assert_eq!(default_f(&parse_upoly("5").unwrap()), UPoly::zero());
        assert_eq!(
            default_f(&parse_upoly("exp(2*u)").unwrap()),
            parse_upoly("2*exp(2*u)").unwrap()
        );
    }

    #[test]
    fn presets() {
        let ks = preset(&Preset::KuramotoSivashinsky, 2).unwrap();
        assert_eq!((ks.a.clone(), ks.n), (int(-1), 2));
        assert_eq!(ks.b, UPoly::constant(int(-1)));
        assert_eq!(ks.f, parse_upoly("-1/2").unwrap());
        assert!(ks.g.is_zero());
        let ch = preset_by_name("cahn-hilliard", &["1".into(), "1".into()], 1).unwrap();
        assert_eq!(ch, spec(1, "3*u^2 - 1", Some("6*u"), "0"));
        let gch = preset_by_name("generalized-ch", &["1/2*u^2".into(), "u^2".into()], 1).unwrap();
        assert_eq!(gch, spec(-1, "u", Some("1"), "-u^2"));
        assert_eq!(
            preset_by_name("cahn-hilliard", &["0".into(), "1".into()], 1),
            Err(ClassifyError::DegenerateCahnHilliard)
        );
        assert!(matches!(
            preset_by_name("burgers", &[], 1),
            Err(ClassifyError::UnknownPreset(_))
        ));
        assert!(matches!(
            preset_by_name("cahn-hilliard", &["1".into()], 1),
            Err(ClassifyError::ParamCount { .. })
        ));
    }
}
