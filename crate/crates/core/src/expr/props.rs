//! Property tests for the exact expression algebra.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{parse_expr, parse_upoly, DiffExpr};
use crate::expr::rational::rat;
use crate::suite::{random_expr, Shape, Waves};

fn shape(n: usize, order: u32, waves: Waves) -> Shape {
    Shape {
        n,
        max_order: order,
        max_terms: 3,
        waves,
    }
}

/// Three expressions whose pairwise products stay in the coefficient class:
/// the first two share `waves`, the third carries trig factors only when the
/// others carry none.
fn triple() -> impl Strategy<Value = (DiffExpr, DiffExpr, DiffExpr)> {
    (any::<u64>(), 1usize..=3, 1u32..=3, any::<bool>()).prop_map(|(seed, n, order, exp)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (plain, last) = if exp {
            (shape(n, order, Waves::Exp), shape(n, order, Waves::Exp))
        } else {
            (shape(n, order, Waves::None), shape(n, order, Waves::Trig))
        };
        let a = random_expr(&mut rng, &plain);
        let b = random_expr(&mut rng, &plain);
        let c = random_expr(&mut rng, &last);
        (a, b, c)
    })
}

fn single() -> impl Strategy<Value = DiffExpr> {
    (any::<u64>(), 1usize..=3, 1u32..=3, any::<bool>()).prop_map(|(seed, n, order, trig)| {
        let waves = if trig { Waves::Trig } else { Waves::Exp };
        random_expr(
            &mut ChaCha8Rng::seed_from_u64(seed),
            &shape(n, order, waves),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws((a, b, c) in triple()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &DiffExpr::one(), a.clone());
    }

    #[test]
    fn print_parse_round_trip(e in single()) {
        prop_assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn upoly_round_trip(terms in proptest::collection::vec((-4i64..=4, 1i64..=3, 0u32..=3, -2i64..=2), 0..4)) {
        let src: Vec<String> = terms
            .iter()
            .map(|(p, q, k, alpha)| format!("({p}/{q})*u^{k}*exp({alpha}*u)"))
            .collect();
        let src = if src.is_empty() { "0".to_string() } else { src.join(" + ") };
        let p = parse_upoly(&src).unwrap();
        prop_assert_eq!(parse_upoly(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn partial_x_linear_and_leibniz((a, b, c) in triple(), num in -5i64..=5, den in 1i64..=4) {
        let k = rat(num, den);
        for i in 0..3 {
            prop_assert_eq!(
                (&a.scale(&k) + &b).partial_x(i),
                &a.partial_x(i).scale(&k) + &b.partial_x(i)
            );
            prop_assert_eq!(
                (&a * &c).partial_x(i),
                &(&a.partial_x(i) * &c) + &(&a * &c.partial_x(i))
            );
        }
    }
}
