use super::*;
use crate::classify::{classify, preset, Preset};
use crate::expr::rational::{int, rat};
use crate::expr::{parse_expr, parse_upoly};
use crate::jet::euler;

fn e(s: &str) -> DiffExpr {
    parse_expr(s).unwrap()
}

fn pde(a: Rational, b: &str, f: Option<&str>, g: &str, n: usize) -> PdeSpec {
    PdeSpec::new(
        a,
        parse_upoly(b).unwrap(),
        f.map(|s| parse_upoly(s).unwrap()),
        parse_upoly(g).unwrap(),
        n,
    )
    .unwrap()
}

fn ch(n: usize) -> PdeSpec {
    preset(
        &Preset::CahnHilliard {
            c1: int(1),
            c2: int(1),
        },
        n,
    )
    .unwrap()
}

fn ks(n: usize) -> PdeSpec {
    preset(&Preset::KuramotoSivashinsky, n).unwrap()
}

fn assert_all_verify(p: &PdeSpec, sel: &ModeSelector) -> usize {
    let cls = classify(p).unwrap();
    let laws = conservation_laws(&cls, p, sel).unwrap();
    for cl in &laws {
        let r = LawReport::new(0, &cls, p, cl).unwrap();
        assert!(r.verified, "{cls} n={}: {r}", p.n);
        assert!(!is_trivial(cl));
    }
    laws.len()
}

#[test]
fn case_ii_harmonic_basis_example() {
    let p = ch(2);
    let cls = classify(&p).unwrap();
    let sel = ModeSelector {
        harmonic_degree: 2,
        ..Default::default()
    };
    let qs: Vec<DiffExpr> = characteristic_basis(&cls, &p.a, 2, &sel)
        .unwrap()
        .into_iter()
        .map(|c| c.q)
        .collect();
    assert_eq!(
        qs,
        vec![e("1"), e("x1"), e("x2"), e("x1*x2"), e("x1^2 - x2^2")]
    );
}

#[test]
fn case_iii_helmholtz_example() {
    // b = g'/2 + 1 with g = u^3  →  c4 = 2, c5 = 1.
    let p = pde(int(1), "3/2*u^2 + 1", None, "u^3", 2);
    let cls = classify(&p).unwrap();
    assert_eq!(
        cls.variant,
        Variant::CaseIII {
            c4: int(2),
            c5: int(1)
        }
    );
    let basis = characteristic_basis(&cls, &p.a, 2, &ModeSelector::default()).unwrap();
    let qs: Vec<DiffExpr> = basis.iter().map(|c| c.spatial.clone().unwrap()).collect();
    assert_eq!(
        qs,
        vec![
            e("cos(x1)*cos(x2)"),
            e("cos(x1)*sin(x2)"),
            e("sin(x1)*cos(x2)"),
            e("sin(x1)*sin(x2)")
        ]
    );
    assert!(helmholtz_residual(&e("cos(x1)*cos(x2)"), &int(2), 2).is_zero());
    let t = density(&cls, &basis[0]).unwrap();
    assert_eq!(t, e("exp(-2*t)*u*cos(x1)*cos(x2)"));
    assert_all_verify(&p, &ModeSelector::default());
}

#[test]
fn case_i_constant_mode_example() {
    let p = pde(int(1), "0", Some("0"), "u + 5", 1);
    let cls = classify(&p).unwrap();
    assert_eq!(
        cls.variant,
        Variant::CaseI {
            c1: int(0),
            c2: int(1),
            c3: int(5)
        }
    );
    let sel = ModeSelector {
        wavevectors: Some(vec![vec![int(0)]]),
        ..Default::default()
    };
    let basis = characteristic_basis(&cls, &p.a, 1, &sel).unwrap();
    assert_eq!(basis.len(), 1);
    assert_eq!(basis[0].q, e("exp(-t)"));
    assert!(case_i_residual(&basis[0].q, &int(1), &int(0), &int(1), 1).is_zero());
}

#[test]
fn density_examples() {
    let p = ch(1);
    let cls = classify(&p).unwrap();
    let mass = Characteristic::custom(DiffExpr::one(), CaseTag::II).unwrap();
    assert_eq!(density(&cls, &mass).unwrap(), e("u"));

    let p5 = pde(int(1), "u^2", None, "5*u", 1);
    let cls5 = classify(&p5).unwrap();
    assert_eq!(
        cls5.variant,
        Variant::CaseII {
            c2: int(5),
            c3: int(0)
        }
    );
    let basis = characteristic_basis(&cls5, &p5.a, 1, &ModeSelector::default()).unwrap();
    assert_eq!(density(&cls5, &basis[1]).unwrap(), e("exp(-5*t)*x1*u"));
}

#[test]
fn density_rejects_case_mismatch() {
    let p = ch(1);
    let cls = classify(&p).unwrap();
    let wrong = Characteristic::custom(DiffExpr::one(), CaseTag::III).unwrap();
    assert!(matches!(
        density(&cls, &wrong),
        Err(ConsLawError::CaseMismatch { .. })
    ));
    assert!(Characteristic::custom(e("u_x1"), CaseTag::II).is_err());
}

#[test]
fn cahn_hilliard_mass_flux() {
    let p = ch(1);
    let cls = classify(&p).unwrap();
    let cl = ConsLaw::build(
        &cls,
        Characteristic::custom(DiffExpr::one(), CaseTag::II).unwrap(),
        &p,
    )
    .unwrap();
    assert_eq!(cl.x, vec![e("-u_x1x1x1 - 3*u^2*u_x1 + u_x1")]);
    assert!(verify_identity(&p, &cl).unwrap().is_zero());
}

#[test]
fn case_ii_c3_flux_term() {
    let p = pde(int(1), "u^2", None, "7", 1);
    let cls = classify(&p).unwrap();
    assert_eq!(
        cls.variant,
        Variant::CaseII {
            c2: int(0),
            c3: int(7)
        }
    );
    let basis = characteristic_basis(&cls, &p.a, 1, &ModeSelector::default()).unwrap();
    let x_mode = &basis[1];
    assert_eq!(x_mode.q, e("x1"));
    let tab = tabulated::law(&cls, x_mode, &p).unwrap().unwrap();
    // tabulated c3 terms: -c3 x Q̃ - c3/2 x² ∂Q̃ = -(3/2) c3 x²
    let tab_c3: DiffExpr = tab.x[0]
        .terms()
        .filter(|(m, _)| m.u.is_unit() && m.jets.is_empty())
        .map(|(m, c)| DiffExpr::from_monomial(c.clone(), m.clone()))
        .sum();
    assert_eq!(tab_c3, e("-21/2*x1^2"));
    let cl = ConsLaw::build(&cls, x_mode.clone(), &p).unwrap();
    let c3_part: DiffExpr = cl.x[0]
        .terms()
        .filter(|(m, _)| m.u.is_unit() && m.jets.is_empty())
        .map(|(m, c)| DiffExpr::from_monomial(c.clone(), m.clone()))
        .sum();
    assert_eq!(c3_part, e("-7/2*x1^2"));
    assert!(verify_identity(&p, &cl).unwrap().is_zero());
    assert!(!verify_identity(&p, &tab).unwrap().is_zero());
}

#[test]
fn case_i_flux_example() {
    let p = pde(int(1), "0", Some("0"), "u", 1);
    let cls = classify(&p).unwrap();
    let sel = ModeSelector {
        wavevectors: Some(vec![vec![int(0)]]),
        ..Default::default()
    };
    let basis = characteristic_basis(&cls, &p.a, 1, &sel).unwrap();
    let cl = ConsLaw::build(&cls, basis[0].clone(), &p).unwrap();
    assert_eq!(cl.x, vec![e("-exp(-t)*u_x1x1x1")]);
    assert!(verify_identity(&p, &cl).unwrap().is_zero());
}

#[test]
fn invalid_law_detected() {
    let p = ks(1);
    let law = ConsLaw {
        q: Characteristic::custom(DiffExpr::one(), CaseTag::II).unwrap(),
        t: DiffExpr::u(),
        x: vec![DiffExpr::zero()],
    };
    let r = verify_identity(&p, &law).unwrap();
    assert_eq!(r, rhs(&p));
    assert!(!r.is_zero());
    let short = ConsLaw { x: vec![], ..law };
    assert!(verify_identity(&p, &short).is_err());
}

#[test]
fn determining_residual_examples() {
    assert!(determining_residual(&ch(2), &DiffExpr::one())
        .unwrap()
        .is_zero());
    assert_eq!(
        determining_residual(&ks(2), &DiffExpr::one()).unwrap(),
        e("u_x1x1 + u_x2x2")
    );
    let p = pde(int(2), "u^3", None, "-3*u + 1", 2);
    assert!(determining_residual(&p, &e("exp(3*t)*x1"))
        .unwrap()
        .is_zero());
    assert!(determining_residual(&p, &e("u_x1")).is_err());
}

#[test]
fn triviality() {
    let zero = ConsLaw {
        q: Characteristic::custom(DiffExpr::zero(), CaseTag::II).unwrap(),
        t: DiffExpr::zero(),
        x: vec![DiffExpr::zero()],
    };
    assert!(is_trivial(&zero));
    let cancelled = Characteristic::custom(e("x1 - x1"), CaseTag::II).unwrap();
    assert!(cancelled.q.is_zero());
    let p = ch(1);
    let cls = classify(&p).unwrap();
    let mass = ConsLaw::build(
        &cls,
        Characteristic::custom(DiffExpr::one(), CaseTag::II).unwrap(),
        &p,
    )
    .unwrap();
    assert!(!is_trivial(&mass));
}

fn case_zoo(n: usize) -> Vec<PdeSpec> {
    vec![
        // case I, several constant regimes including c2 = 0
        pde(int(1), "2", Some("0"), "-3*u + 2", n),
        pde(int(-1), "-1", Some("0"), "u + 1/2", n),
        pde(rat(1, 2), "0", Some("0"), "7", n),
        pde(int(1), "3", Some("0"), "0", n),
        pde(int(1), "0", Some("0"), "0", n),
        // case II
        ch(n),
        pde(int(1), "u^2 + exp(u)", None, "2*u - 5", n),
        pde(int(-2), "exp(-u)", None, "4", n),
        // case III (c4 = 1, 2, 4, negative)
        pde(int(1), "u^2 + 3", None, "1/3*u^3", n),
        pde(int(3), "3/2*u^2 - 1", None, "u^3 + u", n),
        pde(int(1), "1/2*exp(2*u) + 3", None, "exp(2*u)", n),
        pde(int(1), "-u^2", None, "1/3*u^3", n),
    ]
}

#[test]
fn every_generated_law_verifies() {
    for n in 1..=3 {
        for p in case_zoo(n) {
            let cls = classify(&p).unwrap();
            let sel = match cls.variant {
                Variant::CaseI { .. } => ModeSelector {
                    poly_degree: Some(2),
                    ..Default::default()
                },
                Variant::CaseIII { ref c4, .. } if n == 1 && *c4 == int(2) => continue,
                _ => ModeSelector::default(),
            };
            let count = assert_all_verify(&p, &sel);
            assert!(count > 0, "{cls}");
        }
    }
}

#[test]
fn case_i_exponential_modes_verify() {
    let p = pde(int(1), "2", Some("0"), "-3*u + 2", 2);
    let sel = ModeSelector {
        kind: Some(WaveKind::Exponential),
        max_k2: 2,
        ..Default::default()
    };
    assert_eq!(assert_all_verify(&p, &sel), 9);
}

#[test]
fn case_i_default_mode_counts() {
    let counts: Vec<usize> = (1..=3)
        .map(|n| {
            let p = pde(int(1), "2", Some("0"), "-3*u + 2", n);
            let cls = classify(&p).unwrap();
            characteristic_basis(&cls, &p.a, n, &ModeSelector::default())
                .unwrap()
                .len()
        })
        .collect();
    assert_eq!(counts, vec![5, 13, 33]);
}

#[test]
fn one_dimensional_cases_have_two_solutions() {
    for p in [
        ch(1),
        pde(int(1), "u^2 + 3", None, "1/3*u^3", 1),
        pde(int(1), "-u^2", None, "1/3*u^3", 1),
    ] {
        let cls = classify(&p).unwrap();
        let sel = ModeSelector {
            harmonic_degree: 5,
            ..Default::default()
        };
        assert_eq!(
            characteristic_basis(&cls, &p.a, 1, &sel).unwrap().len(),
            2,
            "{cls}"
        );
    }
}

#[test]
fn case_iii_selector_errors() {
    // c4 = -1 cannot carry trig modes
    let neg = pde(int(1), "-u^2", None, "u^3", 2);
    let cls = classify(&neg).unwrap();
    assert_eq!(
        cls.variant,
        Variant::CaseIII {
            c4: int(-3),
            c5: int(0)
        }
    );
    let sel = ModeSelector {
        kind: Some(WaveKind::Trig),
        ..Default::default()
    };
    assert!(matches!(
        characteristic_basis(&cls, &neg.a, 2, &sel),
        Err(ConsLawError::NoAdmissibleWavevector(_))
    ));
    // |c4| = 3 is not a sum of two squares and not a rational square
    let sel = ModeSelector::default();
    assert!(matches!(
        characteristic_basis(&cls, &neg.a, 2, &sel),
        Err(ConsLawError::NoAdmissibleWavevector(_))
    ));
    // explicit wavevectors must match |k|² = |c4|
    let sel = ModeSelector {
        wavevectors: Some(vec![vec![int(1), int(1)]]),
        ..Default::default()
    };
    assert!(characteristic_basis(&cls, &neg.a, 2, &sel).is_err());
    let wrong_dim = ModeSelector {
        wavevectors: Some(vec![vec![int(1)]]),
        ..Default::default()
    };
    assert!(matches!(
        characteristic_basis(&cls, &neg.a, 2, &wrong_dim),
        Err(ConsLawError::WavevectorDim { .. })
    ));
    // rational wavevectors with the right norm are accepted
    let sel = ModeSelector {
        wavevectors: Some(vec![vec![int(1), int(1)], vec![rat(3, 5), int(0)]]),
        ..Default::default()
    };
    let p = pde(int(1), "u^2 + 2", None, "1/3*u^3", 2);
    let cls2 = classify(&p).unwrap();
    assert_eq!(
        cls2.variant,
        Variant::CaseIII {
            c4: int(1),
            c5: int(2)
        }
    );
    assert!(characteristic_basis(&cls2, &p.a, 2, &sel).is_err());
    let ok = ModeSelector {
        wavevectors: Some(vec![vec![rat(3, 5), rat(4, 5)]]),
        ..Default::default()
    };
    let basis = characteristic_basis(&cls2, &p.a, 2, &ok).unwrap();
    assert_eq!(basis.len(), 4);
    for c in basis {
        assert!(verify_identity(&p, &ConsLaw::build(&cls2, c, &p).unwrap())
            .unwrap()
            .is_zero());
    }
}

#[test]
fn no_laws_for_nocl() {
    let p = ks(2);
    let cls = classify(&p).unwrap();
    assert!(matches!(
        characteristic_basis(&cls, &p.a, 2, &ModeSelector::default()),
        Err(ConsLawError::NoLaws(_))
    ));
}

#[test]
fn nocl_probe_family_never_solves() {
    let nocl = [
        ks(2),
        pde(int(1), "2", Some("0"), "u^2", 2),
        pde(int(1), "u", None, "u^3 + u^2", 2),
        pde(int(1), "u^2", None, "exp(u)", 2),
    ];
    for p in nocl {
        let cls = classify(&p).unwrap();
        assert!(!cls.admits_laws());
        for q in probe_family(2) {
            assert!(
                !determining_residual(&p, &q).unwrap().is_zero(),
                "{cls}: {q}"
            );
        }
    }
}

#[test]
fn adjoint_form_of_determining_equation() {
    for n in 1..=2 {
        let mut pdes = case_zoo(n);
        pdes.push(ks(n));
        pdes.push(pde(int(1), "u^2", None, "exp(u)", n));
        for p in pdes {
            for q in probe_family(n) {
                let lhs = euler(&(&q * &rhs(&p))) + q.partial_t();
                assert_eq!(lhs, determining_residual(&p, &q).unwrap());
            }
        }
    }
}

#[test]
fn harmonic_basis_is_independent() {
    let sel = ModeSelector {
        harmonic_degree: 4,
        ..Default::default()
    };
    let p = ch(3);
    let cls = classify(&p).unwrap();
    let qs: Vec<DiffExpr> = characteristic_basis(&cls, &p.a, 3, &sel)
        .unwrap()
        .into_iter()
        .map(|c| c.q)
        .collect();
    let expected: usize = (0..=4).map(|m| harmonic_dimension(3, m)).sum();
    assert_eq!(qs.len(), expected);
    // Gaussian elimination on coefficient vectors
    let keys: Vec<_> = {
        let mut k: Vec<_> = qs
            .iter()
            .flat_map(|q| q.terms().map(|(m, _)| m.clone()))
            .collect();
        k.sort();
        k.dedup();
        k
    };
    let mut rows: Vec<Vec<Rational>> = qs
        .iter()
        .map(|q| {
            keys.iter()
                .map(|k| {
                    q.terms()
                        .find(|(m, _)| *m == k)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_default()
                })
                .collect()
        })
        .collect();
    let mut rank = 0;
    for c in 0..keys.len() {
        if let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) {
            rows.swap(rank, p);
            for r in 0..rows.len() {
                if r != rank && !rows[r][c].is_zero() {
                    let f = &rows[r][c] / &rows[rank][c];
                    for j in 0..keys.len() {
                        let d = &f * &rows[rank][j];
                        rows[r][j] -= d;
                    }
                }
            }
            rank += 1;
        }
    }
    assert_eq!(rank, qs.len());
}

#[test]
fn identity_is_linear_in_laws() {
    let p = pde(int(1), "u^2 + exp(u)", None, "2*u - 5", 2);
    let cls = classify(&p).unwrap();
    let laws = conservation_laws(
        &cls,
        &p,
        &ModeSelector {
            harmonic_degree: 2,
            ..Default::default()
        },
    )
    .unwrap();
    let weights = [rat(3, 2), int(-7), rat(1, 9)];
    let mut q = DiffExpr::zero();
    let mut t = DiffExpr::zero();
    let mut x = vec![DiffExpr::zero(); 2];
    for (cl, w) in laws.iter().skip(1).zip(&weights) {
        q.add_scaled(&cl.q.q, w);
        t.add_scaled(&cl.t, w);
        for i in 0..2 {
            x[i].add_scaled(&cl.x[i], w);
        }
    }
    assert!(identity_residual(&p, &q, &t, &x).unwrap().is_zero());
}

#[test]
fn tabulated_forms_hold_only_in_special_cases() {
    let check = |p: &PdeSpec| -> Vec<bool> {
        let cls = classify(p).unwrap();
        characteristic_basis(&cls, &p.a, p.n, &ModeSelector::default())
            .unwrap()
            .into_iter()
            .filter_map(|c| tabulated::law(&cls, &c, p).unwrap())
            .map(|l| verify_identity(p, &l).unwrap().is_zero())
            .collect()
    };
    // case I: only c3 = 1 balances the Q/c2 shift
    assert!(check(&pde(int(1), "2", Some("0"), "-3*u + 1", 2))
        .iter()
        .all(|&v| v));
    assert!(check(&pde(int(1), "2", Some("0"), "-3*u + 2", 2))
        .iter()
        .all(|&v| !v));
    // case III: c4 = 1 verifies, c4 = 2 does not
    assert!(check(&pde(int(1), "u^2 + 3", None, "1/3*u^3", 2))
        .iter()
        .all(|&v| v));
    assert!(check(&pde(int(1), "3/2*u^2 + 1", None, "u^3", 2))
        .iter()
        .all(|&v| !v));
    // case II: the b-terms carry the wrong sign and index
    assert!(check(&ch(1)).iter().all(|&v| !v));
    let cls = classify(&pde(int(1), "0", Some("0"), "0", 1)).unwrap();
    let ch0 = Characteristic::custom(DiffExpr::one(), CaseTag::I).unwrap();
    assert!(
        tabulated::law(&cls, &ch0, &pde(int(1), "0", Some("0"), "0", 1))
            .unwrap()
            .is_none()
    );
}

#[test]
fn report_serializes() {
    let p = ch(1);
    let cls = classify(&p).unwrap();
    let laws = conservation_laws(&cls, &p, &ModeSelector::default()).unwrap();
    let r = LawReport::new(1, &cls, &p, &laws[0]).unwrap();
    let text = r.to_string();
    assert!(text.contains("T  = u"), "{text}");
    assert!(text.contains("verified: yes"));
    assert_eq!(r.tabulated_verified, Some(false));
}
