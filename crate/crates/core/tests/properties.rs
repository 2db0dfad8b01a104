//! Property tests for the polynomial layer: exact algebraic identities
//! of differentiation, printing round-trips, and the translation and
//! substitution operators.

use proptest::prelude::*;

use mpec_core::expr::{parse_expr, Monomial, PolyExpr};
use mpec_core::rat::{rat, Rat};

const ARITY: (usize, usize) = (2, 2);
const NVARS: usize = 4;

fn poly_strategy() -> impl Strategy<Value = PolyExpr> {
    prop::collection::vec(
        (
            prop::collection::vec(0u32..=3, NVARS),
            -10i64..=10,
        ),
        0..=5,
    )
    .prop_map(|terms| {
        PolyExpr::from_terms(
            ARITY,
            terms
                .into_iter()
                .map(|(exps, c)| (Monomial(exps), rat(c))),
        )
    })
}

fn point_strategy() -> impl Strategy<Value = Vec<Rat>> {
    prop::collection::vec((-6i64..=6, 1i64..=4), NVARS)
        .prop_map(|v| v.into_iter().map(|(p, q)| Rat::new(p.into(), q.into())).collect())
}

proptest! {
    #[test]
    fn differentiation_is_linear(p in poly_strategy(), q in poly_strategy(), v in 0usize..NVARS) {
        let sum = &p + &q;
        let left = sum.differentiate(v).unwrap();
        let right = &p.differentiate(v).unwrap() + &q.differentiate(v).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn product_rule_is_exact(p in poly_strategy(), q in poly_strategy(), v in 0usize..NVARS) {
        let prod = &p * &q;
        let left = prod.differentiate(v).unwrap();
        let dp = p.differentiate(v).unwrap();
        let dq = q.differentiate(v).unwrap();
        let right = &(&p * &dq) + &(&q * &dp);
        prop_assert_eq!(left, right);
    }

    #[test]
    fn print_parse_round_trip(p in poly_strategy()) {
        let printed = p.to_string();
        let reparsed = parse_expr(&printed, ARITY).unwrap();
        prop_assert_eq!(p, reparsed);
    }

    #[test]
    fn translation_shifts_evaluation(p in poly_strategy(), c in point_strategy(), v in point_strategy()) {
        let shifted = p.translate(&c).unwrap();
        let moved: Vec<Rat> = c.iter().zip(&v).map(|(a, b)| a + b).collect();
        prop_assert_eq!(shifted.evaluate(&v).unwrap(), p.evaluate(&moved).unwrap());
    }

    #[test]
    fn substitution_agrees_with_evaluation(
        p in poly_strategy(),
        r in poly_strategy(),
        var in 0usize..NVARS,
        z in point_strategy(),
    ) {
        let substituted = p.substitute(var, &r);
        let mut z_sub = z.clone();
        z_sub[var] = r.evaluate(&z).unwrap();
        prop_assert_eq!(substituted.evaluate(&z).unwrap(), p.evaluate(&z_sub).unwrap());
    }

    #[test]
    fn gradient_entries_match_partials(p in poly_strategy(), z in point_strategy()) {
        let grad = p.gradient_at(&z).unwrap();
        for v in 0..NVARS {
            prop_assert_eq!(&grad[v], &p.differentiate(v).unwrap().evaluate(&z).unwrap());
        }
    }
}
