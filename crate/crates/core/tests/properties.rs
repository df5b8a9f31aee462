//! Property tests for the series algebra and the combinatorial kernels.

use phi2::combinatorics::{factor_two, gamma_binary, gamma_via_f};
use phi2::series::{two_adic_valuation, Valuation};
use phi2::{Integer, LaurentSeries};
use proptest::prelude::*;

fn series_strategy() -> impl Strategy<Value = LaurentSeries> {
    (
        -6i64..6,
        1i64..40,
        prop::collection::vec(-1000i64..1000, 0..24),
    )
        .prop_map(|(order, span, coeffs)| {
            LaurentSeries::new(
                order,
                order + span,
                coeffs.into_iter().map(Integer::from).collect(),
            )
        })
}

/// Like the above but with leading coefficient forced to ±1 so inversion is
/// possible.
fn unit_series_strategy() -> impl Strategy<Value = LaurentSeries> {
    (
        -4i64..4,
        8i64..40,
        prop::bool::ANY,
        prop::collection::vec(-1000i64..1000, 0..16),
    )
        .prop_map(|(order, span, negative, tail)| {
            let mut coeffs = vec![Integer::from(if negative { -1 } else { 1 })];
            coeffs.extend(tail.into_iter().map(Integer::from));
            LaurentSeries::new(order, order + span, coeffs)
        })
}

proptest! {
    #[test]
    fn mul_commutes(a in series_strategy(), b in series_strategy()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
    }

    #[test]
    fn mul_associates(a in series_strategy(), b in series_strategy(), c in series_strategy()) {
        let left = a.mul(&b).mul(&c);
        let right = a.mul(&b.mul(&c));
        prop_assert!(left.agrees_with(&right));
        prop_assert_eq!(left.precision(), right.precision());
    }

    #[test]
    fn mul_distributes_over_add(a in series_strategy(), b in series_strategy(), c in series_strategy()) {
        let left = a.mul(&b.add(&c));
        let right = a.mul(&b).add(&a.mul(&c));
        prop_assert!(left.agrees_with(&right));
    }

    #[test]
    fn inversion_round_trips(a in unit_series_strategy(), target in 1i64..20) {
        prop_assume!(!a.is_zero());
        if let Ok(inv) = a.invert(target) {
            let product = a.mul(&inv);
            prop_assert!(product.agrees_with(&LaurentSeries::one()));
        }
    }

    #[test]
    fn u_p_is_linear(a in series_strategy(), b in series_strategy(), p in 2u64..5) {
        let lhs = a.add(&b).u_p(p);
        let rhs = a.u_p(p).add(&b.u_p(p));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitute_neg_is_involutive(a in series_strategy()) {
        prop_assert_eq!(a.substitute_neg().substitute_neg(), a);
    }

    #[test]
    fn dilate_then_extract(a in series_strategy(), k in 2i64..4) {
        // u_p inverts dilation on the nose
        let d = a.dilate(k);
        prop_assert!(d.u_p(k as u64).agrees_with(&a));
    }

    #[test]
    fn pow_matches_iterated_mul(a in series_strategy(), m in 0u64..7) {
        let mut expected = LaurentSeries::one();
        for _ in 0..m {
            expected = expected.mul(&a);
        }
        prop_assert!(a.pow(m).agrees_with(&expected));
    }

    #[test]
    fn series_json_round_trip(a in series_strategy()) {
        let text = serde_json::to_string(&a).unwrap();
        let back: LaurentSeries = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(a, back);
    }

    #[test]
    fn valuation_product_rule(x in -100_000i64..100_000, y in -100_000i64..100_000) {
        let vx = two_adic_valuation(&Integer::from(x));
        let vy = two_adic_valuation(&Integer::from(y));
        let vxy = two_adic_valuation(&Integer::from(x as i128 * y as i128));
        match (vx, vy) {
            (Valuation::Finite(a), Valuation::Finite(b)) => prop_assert_eq!(vxy, Valuation::Finite(a + b)),
            _ => prop_assert_eq!(vxy, Valuation::Infinite),
        }
        let vsum = two_adic_valuation(&Integer::from(x + y));
        prop_assert!(vsum >= vx.min(vy));
    }

    #[test]
    fn gamma_definitions_agree(m in 1u64..1_000_000, alpha in 0u32..70) {
        prop_assert_eq!(gamma_binary(m, alpha), gamma_via_f(m, alpha));
    }

    #[test]
    fn factor_two_reconstructs(n in 1u64..1_000_000_000) {
        let (alpha, n_prime) = factor_two(n);
        prop_assert_eq!(n, (1u64 << alpha) * n_prime);
        prop_assert_eq!(n_prime & 1, 1);
    }
}
