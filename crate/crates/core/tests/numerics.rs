use bilateral::numerics::{
    gamma_ratio, log_gamma_signed, pochhammer_signed, pole_distance, sin_pi, GammaRatioSpec,
    SignedLogValue,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn regular() -> impl Strategy<Value = f64> {
    (-10.0..10.0f64).prop_filter("near a pole", |&x| {
        pole_distance(x) >= 0.05 && pole_distance(x + 1.0) >= 0.05
    })
}

proptest! {
    #[test]
    fn gamma_recurrence(x in regular()) {
        let lhs = log_gamma_signed(x + 1.0).unwrap();
        let rhs = SignedLogValue::from_f64(x) * log_gamma_signed(x).unwrap();
        prop_assert_eq!(lhs.sign(), rhs.sign());
        prop_assert!(lhs.relative_difference(&rhs) <= 1e-11);
    }

    #[test]
    fn gamma_reflection(x in regular()) {
        let g = log_gamma_signed(x).unwrap() * log_gamma_signed(1.0 - x).unwrap();
        let v = g.to_f64() * sin_pi(x) / PI;
        prop_assert!((v - 1.0).abs() <= 1e-10, "x = {x}: {v}");
    }

    #[test]
    fn pochhammer_composition(a in -10.0..10.0f64, m in -20i64..=20, n in -20i64..=20) {
        let (Ok(lhs), Ok(am), Ok(amn)) =
            (pochhammer_signed(a, m + n), pochhammer_signed(a, m), pochhammer_signed(a + m as f64, n))
        else {
            return Ok(());
        };
        prop_assume!(!lhs.is_zero() && !am.is_zero() && !amn.is_zero());
        prop_assert!(lhs.relative_difference(&(am * amn)) <= 1e-11);
    }

    #[test]
    fn pochhammer_negation(a in -10.0..10.0f64, m in 0i64..=20) {
        let (Ok(neg), Ok(pos)) = (pochhammer_signed(a, -m), pochhammer_signed(1.0 - a, m)) else {
            return Ok(());
        };
        prop_assume!(!neg.is_zero() && !pos.is_zero());
        let product = neg * pos;
        prop_assert_eq!(product.sign(), if m % 2 == 0 { 1 } else { -1 });
        prop_assert!(product.log_magnitude().abs() <= 1e-11);
    }

    #[test]
    fn gamma_ratio_permutation_invariance(
        num in prop::collection::vec(regular(), 1..5),
        den in prop::collection::vec(regular(), 1..5),
        rot in 0usize..4,
    ) {
        let base = gamma_ratio(&GammaRatioSpec::new(num.clone(), den.clone())).unwrap();
        let mut num_r = num.clone();
        num_r.reverse();
        let mut den_r = den.clone();
        den_r.rotate_left(rot % den.len());
        let permuted = gamma_ratio(&GammaRatioSpec::new(num_r, den_r)).unwrap();
        prop_assert!(base.relative_difference(&permuted) <= 1e-13);

        let reciprocal = gamma_ratio(&GammaRatioSpec::new(num, den).reciprocal()).unwrap();
        let inverse = base.recip().unwrap();
        prop_assert!(reciprocal.relative_difference(&inverse) <= 1e-13);
    }
}

#[test]
fn gamma_closed_forms() {
    let sqrt_pi = PI.sqrt();
    for (x, expected) in [
        (1.0, 1.0),
        (0.5, sqrt_pi),
        (1.5, sqrt_pi / 2.0),
        (5.0, 24.0),
        (-0.5, -2.0 * sqrt_pi),
        (-1.5, 4.0 * sqrt_pi / 3.0),
    ] {
        let g = log_gamma_signed(x).unwrap().to_f64();
        assert!(
            ((g - expected) / expected).abs() <= 1e-12,
            "Gamma({x}) = {g}"
        );
    }
}

#[test]
fn ratio_pole_semantics() {
    assert!(gamma_ratio(&GammaRatioSpec::new([0.5], [-2.0]))
        .unwrap()
        .is_zero());
    assert!(gamma_ratio(&GammaRatioSpec::new([-1.0], [2.0])).is_err());
    assert!(gamma_ratio(&GammaRatioSpec::new([-1.0], [-3.0])).is_err());
}
