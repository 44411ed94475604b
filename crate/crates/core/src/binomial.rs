//! Generalized binomial coefficients.
//!
//! `C(x, y) = Gamma(x + 1) / (Gamma(y + 1) Gamma(x - y + 1))` for real `x`, `y`,
//! plus an exact big-integer coefficient for the classical case.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gamma_ratio, snap_to_integer, GammaRatioSpec, SignedLogValue};

/// Upper and lower argument of a generalized binomial coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialArgs {
    pub x: f64,
    pub y: f64,
}

impl BinomialArgs {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(Error::InvalidArgument(format!(
                "binomial arguments must be finite (x = {x}, y = {y})"
            )))
        }
    }

    pub fn bracket(&self) -> GammaRatioSpec {
        GammaRatioSpec::new([self.x + 1.0], [self.y + 1.0, self.x - self.y + 1.0])
    }

    pub fn signed(&self) -> Result<SignedLogValue> {
        gamma_ratio(&self.bracket())
    }
}

/// `C(x, y)` in signed-log form.
///
/// Exactly zero when one lower Gamma argument sits on a pole and `x + 1` does
/// not; an error when `x + 1` is a pole.
pub fn binom_signed(x: f64, y: f64) -> Result<SignedLogValue> {
    match integer_binomial(x, y) {
        Some(v) => Ok(SignedLogValue::from_f64(v)),
        None => BinomialArgs::new(x, y)?.signed(),
    }
}

/// `C(x, y)` as a plain float.
pub fn binom_real(x: f64, y: f64) -> Result<f64> {
    match integer_binomial(x, y) {
        Some(v) => Ok(v),
        None => binom_signed(x, y)?.try_to_f64(),
    }
}

const EXACT_INTEGER_LIMIT: i64 = 1000;
const FALLING_PRODUCT_LIMIT: i64 = 64;

/// `C(x, k)` for integer `k` without going through logarithms: correctly
/// rounded for integer `0 <= x <= 1000`, a falling product for small `k`.
fn integer_binomial(x: f64, y: f64) -> Option<f64> {
    let k = snap_to_integer(y)?;
    if let Some(n) = snap_to_integer(x) {
        if !(0..=EXACT_INTEGER_LIMIT).contains(&n) {
            return None;
        }
        return binom_exact(n as u64, k).to_f64().filter(|v| v.is_finite());
    }
    if !(..=FALLING_PRODUCT_LIMIT).contains(&k) || !x.is_finite() {
        return None;
    }
    if k < 0 {
        return Some(0.0);
    }
    Some((0..k).fold(1.0, |acc, i| acc * (x - i as f64) / (i + 1) as f64))
}

/// Exact `C(n, k)`; zero outside `0 <= k <= n`.
pub fn binom_exact(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::from(0u32);
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::from(1u32);
    for i in 1..=k {
        // acc * (n - k + i) is divisible by i at every step
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn classical_and_fractional_values() {
        assert_eq!(binom_real(5.0, 2.0).unwrap(), 10.0);
        assert_eq!(binom_real(2.0, 1.0).unwrap(), 2.0);
        assert!(close(binom_real(0.5, 2.0).unwrap(), -0.125, 1e-14));
        assert!(close(
            binom_real(1.0, 0.5).unwrap(),
            1.273_239_544_735_162_7,
            1e-13
        ));
        // high-precision oracle value for Gamma(3.5) / (Gamma(1.7) Gamma(2.8))
        assert!(close(
            binom_real(2.5, 0.7).unwrap(),
            2.181_643_534_736_108_9,
            1e-13
        ));
    }

    #[test]
    fn lower_poles_give_exact_zero() {
        let v = binom_signed(3.0, 5.0).unwrap();
        assert!(v.is_zero());
        assert_eq!(binom_real(3.0, 5.0).unwrap(), 0.0);
        assert_eq!(binom_real(2.0, -1.0).unwrap(), 0.0);
        assert_eq!(binom_real(0.3, -2.0).unwrap(), 0.0);
    }

    #[test]
    fn upper_pole_errors() {
        // x + 1 = 0 with a lower pole: indeterminate
        assert!(matches!(
            binom_signed(-1.0, 2.0),
            Err(Error::IndeterminateRatio(_))
        ));
        // x + 1 = 0, y = 0.5: lower arguments regular, value infinite
        assert!(matches!(
            binom_signed(-1.0, 0.5),
            Err(Error::InfiniteValue(_))
        ));
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(
            binom_real(2000.0, 1000.0),
            Err(Error::Overflow(_))
        ));
        assert!(binom_signed(2000.0, 1000.0).unwrap().log_magnitude() > 1380.0);
    }

    #[test]
    fn exact_values() {
        assert_eq!(binom_exact(5, 2), BigUint::from(10u32));
        assert_eq!(binom_exact(30, 15), BigUint::from(155_117_520u32));
        assert_eq!(binom_exact(4, -1), BigUint::from(0u32));
        assert_eq!(binom_exact(4, 5), BigUint::from(0u32));
        assert_eq!(binom_exact(0, 0), BigUint::from(1u32));
        assert_eq!(
            binom_exact(100, 50).to_string(),
            "100891344545564193334812497256"
        );
    }

    #[test]
    fn finite_arguments_required() {
        assert!(matches!(
            binom_signed(f64::NAN, 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }
}
