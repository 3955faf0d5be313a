//! Randomized property tests for the iterated-logarithm scalar type and the
//! Hölder-exponent machinery.

use proptest::prelude::*;

use fde_toolkit::harnack::holder_exponent;
use fde_toolkit::lognum::TowerScalar;

fn finite_nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![
        // Moderate magnitudes.
        (-1e15f64..1e15).prop_filter("nonzero", |x| x.abs() > 1e-300),
        // Wide log-uniform spread over both signs.
        ((-700.0f64..700.0), any::<bool>()).prop_map(|(e, neg)| {
            let v = e.exp();
            if neg {
                -v
            } else {
                v
            }
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25_000))]

    #[test]
    fn round_trip_and_compare_match_f64(a in finite_nonzero(), b in finite_nonzero()) {
        let ta = TowerScalar::from_f64(a).unwrap();
        let tb = TowerScalar::from_f64(b).unwrap();
        // Round trip within relative 1e-12.
        prop_assert!((ta.to_f64() - a).abs() <= 1e-12 * a.abs());
        // Ordering agrees with f64 ordering.
        let expect = a.partial_cmp(&b).unwrap();
        prop_assert_eq!(ta.compare(&tb), expect);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25_000))]

    #[test]
    fn mul_div_inverse(a in finite_nonzero(), b in finite_nonzero()) {
        let ta = TowerScalar::from_f64(a).unwrap();
        let tb = TowerScalar::from_f64(b).unwrap();
        let back = ta.mul(&tb).unwrap().div(&tb).unwrap();
        // Recover a within relative 1e-10 (two log-space round trips).
        let got = back.to_f64();
        prop_assert!(
            (got - a).abs() <= 1e-10 * a.abs(),
            "a = {}, got = {}", a, got
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25_000))]

    #[test]
    fn add_is_commutative_and_monotone(a in finite_nonzero(), b in finite_nonzero()) {
        let ta = TowerScalar::from_f64(a).unwrap();
        let tb = TowerScalar::from_f64(b).unwrap();
        let ab = ta.add(&tb).unwrap();
        let ba = tb.add(&ta).unwrap();
        prop_assert_eq!(ab.compare(&ba), std::cmp::Ordering::Equal);
        // Against f64 when the sum is representable and away from
        // cancellation.
        let s = a + b;
        if s.is_finite() && s.abs() > 1e-8 * (a.abs() + b.abs()) && s != 0.0 {
            prop_assert!(
                (ab.to_f64() - s).abs() <= 1e-9 * s.abs(),
                "a = {a}, b = {b}, sum = {s}, got = {}", ab.to_f64()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25_000))]

    #[test]
    fn pow_matches_log_identity(ln_a in 1.0f64..500.0, p in 0.01f64..50.0) {
        // a = e^{ln_a} > 1, a^p via pow vs the log identity.
        let a = TowerScalar::from_ln(ln_a).unwrap();
        let tp = TowerScalar::from_f64(p).unwrap();
        let got = a.pow(&tp).unwrap();
        let expect = TowerScalar::from_ln(ln_a * p).unwrap();
        let (l1, l2) = (got.ln_abs_f64().unwrap(), expect.ln_abs_f64().unwrap());
        prop_assert!((l1 - l2).abs() <= 1e-10 * l2.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn holder_exponent_strictly_decreasing_across_levels(
        lo in 0.29f64..700.0,
        gap in 0.01f64..100.0,
        // ln(hbar) = e^{level1_mag} must stay a finite f64 so that
        // ln(nu) ~ -ln(hbar) is representable; cap well below ln(f64::MAX).
        level1_mag in 40.0f64..700.0,
    ) {
        // Level-0 pairs: bigger log_hbar gives strictly smaller nu.
        let h1 = TowerScalar::from_f64(lo).unwrap();
        let h2 = TowerScalar::from_f64(lo + gap).unwrap();
        let n1 = holder_exponent(&h1).unwrap();
        let n2 = holder_exponent(&h2).unwrap();
        prop_assert_eq!(n2.compare(&n1), std::cmp::Ordering::Less);
        // nu in (0, 1] throughout (equals 1 exactly at log_hbar = ln(4/3)).
        prop_assert!(n1.sign() > 0);
        prop_assert!(n1.compare(&TowerScalar::one()) != std::cmp::Ordering::Greater);
        // Across tower levels: a level-1 log_hbar dominates every level-0
        // one and must give a smaller nu.
        let big = TowerScalar::normalize(1, 1, level1_mag).unwrap();
        let nb = holder_exponent(&big).unwrap();
        prop_assert_eq!(nb.compare(&n2), std::cmp::Ordering::Less);
        prop_assert!(nb.sign() > 0);
    }
}
