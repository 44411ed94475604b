use bilateral::binomial::{binom_exact, binom_real, binom_signed};
use bilateral::numerics::pole_distance;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn regular_pair() -> impl Strategy<Value = (f64, f64)> {
    (-5.0..15.0f64, -10.0..20.0f64).prop_filter("near a pole", |&(x, y)| {
        [x + 1.0, y + 1.0, x - y + 1.0]
            .iter()
            .all(|&v| pole_distance(v) >= 0.05)
    })
}

proptest! {
    #[test]
    fn symmetry((x, y) in regular_pair()) {
        let a = binom_signed(x, y).unwrap();
        let b = binom_signed(x, x - y).unwrap();
        prop_assert_eq!(a.sign(), b.sign());
        prop_assert!(a.relative_difference(&b) <= 1e-11);
    }

    #[test]
    fn pascal((x, y) in regular_pair()) {
        prop_assume!(pole_distance(x) >= 0.05 && pole_distance(y) >= 0.05);
        let lhs = binom_real(x, y).unwrap();
        let rhs = binom_real(x - 1.0, y - 1.0).unwrap() + binom_real(x - 1.0, y).unwrap();
        let scale = lhs.abs().max(rhs.abs());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale, "C({x}, {y}): {lhs} vs {rhs}");
    }
}

#[test]
fn exact_oracle_equivalence() {
    for n in 0..=60u64 {
        for k in 0..=n {
            let exact = binom_exact(n, k as i64).to_f64().unwrap();
            let real = binom_real(n as f64, k as f64).unwrap();
            assert!(((real - exact) / exact).abs() <= 1e-12, "C({n}, {k})");
        }
    }
}

#[test]
fn decay_plateau() {
    for (x, y0) in [(0.5, 0.3), (1.7, -0.4), (3.2, 0.5)] {
        let scaled: Vec<f64> = (1_000..=10_000)
            .step_by(500)
            .map(|j| binom_real(x, y0 + j as f64).unwrap().abs() * (j as f64).powf(x + 1.0))
            .collect();
        let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = scaled.iter().copied().fold(0.0, f64::max);
        assert!(lo > 0.0 && (hi - lo) / hi <= 0.05, "x = {x}: [{lo}, {hi}]");
    }
}
