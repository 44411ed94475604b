//! Numerical and exact verification of the binomial and bilateral
//! hypergeometric identities.
//!
//! | identity                | checked relation                                                  |
//! |-------------------------|-------------------------------------------------------------------|
//! | `binomial-theorem`      | `sum_k C(n,k) x^k = (1+x)^n`, exact integers                      |
//! | `vandermonde-exact`     | `C(n,m) = sum_k C(n-p, m-k) C(p,k)`, exact integers               |
//! | `bilateral-binomial`    | `sum_k C(x, y+k) z^(y+k) = (1+z)^x`                              |
//! | `gauss-2h2`             | `2H2[a,b;c,d;1]` against its closed Gamma bracket                 |
//! | `bilateral-vandermonde` | `C(n,K) = sum_{M in M0+Z} C(n-p, K-M) C(p, M)`                    |
//! | `eq18`                  | `C(n,K)` = Gamma bracket times a `2H2` at an arbitrary offset `M` |

mod report;
mod sweep;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::binomial::{binom_exact, binom_real, binom_signed};
use crate::complex::ComplexValue;
use crate::error::{Error, Result};
use crate::numerics::{gamma_ratio, is_pole, pole_distance, snap, GammaRatioSpec, SignedLogValue};
use crate::series::{
    bilateral_binomial_sum, eval_bilateral, power_principal, BilateralSeriesSpec, Classification,
    SeriesResult, TruncationPolicy,
};

pub use report::{
    inputs, residuals, AuxiliaryValue, ExactComparison, IdentityReport, SeriesDiagnostic,
    RESIDUAL_FLOOR,
};
pub use sweep::{run_sweep, IdentityKind, Margins, SweepConfig, SweepReport, MAX_DRAWS};

/// Tolerance used when a caller does not supply one.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Minimum distance of Gamma arguments from the pole lattice in `gauss-2h2`.
pub const GAUSS_LATTICE_MARGIN: f64 = 0.05;

/// Minimum `c + d - a - b - 1` in `gauss-2h2`.
pub const GAUSS_CONVERGENCE_MARGIN: f64 = 0.05;

/// Smallest admissible `n + 1` (and `x + 1`) for the bilateral sums.
pub const BILATERAL_DECAY_MARGIN: f64 = 0.05;

fn real(x: f64) -> ComplexValue {
    ComplexValue::new(x, 0.0)
}

fn bigint_to_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(if v.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

fn exact_report(
    identity: &str,
    inputs: std::collections::BTreeMap<String, Value>,
    pairs: Vec<(String, BigInt, BigInt)>,
) -> IdentityReport {
    let shown = pairs.iter().position(|(_, l, r)| l != r).unwrap_or(0);
    let mut worst = None;
    let mut exact = Vec::with_capacity(pairs.len());
    for (i, (label, lhs, rhs)) in pairs.into_iter().enumerate() {
        exact.push(ExactComparison {
            label,
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            equal: lhs == rhs,
        });
        if i == shown {
            worst = Some((lhs, rhs));
        }
    }
    let all_equal = exact.iter().all(|e| e.equal);
    let (lhs, rhs) = worst.unwrap_or_default();
    let diff = &lhs - &rhs;
    let scale = lhs.abs().max(rhs.abs());
    let (abs_residual, rel_residual) = if diff.is_zero() {
        (0.0, 0.0)
    } else {
        let abs = bigint_to_f64(&diff.abs());
        (abs, (abs / bigint_to_f64(&scale)).min(1.0 / RESIDUAL_FLOOR))
    };
    IdentityReport {
        identity: identity.to_owned(),
        variant: None,
        inputs,
        lhs: real(bigint_to_f64(&lhs)),
        rhs: real(bigint_to_f64(&rhs)),
        abs_residual,
        rel_residual,
        tolerance: 0.0,
        passed: all_equal,
        diagnostics: Vec::new(),
        auxiliary: Vec::new(),
        exact,
        error: None,
    }
}

/// `sum_{k=0}^n C(n,k) x^k = (1+x)^n` in exact integer arithmetic, for each `x`.
pub fn verify_binomial_theorem(n: u64, x_values: &[i64]) -> IdentityReport {
    let pairs = x_values
        .iter()
        .map(|&x| {
            let xb = BigInt::from(x);
            let mut power = BigInt::from(1);
            let mut lhs = BigInt::zero();
            for k in 0..=n {
                lhs += BigInt::from(binom_exact(n, k as i64)) * &power;
                power *= &xb;
            }
            let rhs = num_traits::pow::pow(BigInt::from(1 + x), n as usize);
            (format!("x = {x}"), lhs, rhs)
        })
        .collect();
    exact_report(
        "binomial-theorem",
        inputs([("n", n.into()), ("x", x_values.to_vec().into())]),
        pairs,
    )
}

/// A classical Vandermonde instance `C(n, m) = sum_k C(n-p, m-k) C(p, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactVandermondeInstance {
    pub n: u64,
    pub m: i64,
    pub p: u64,
}

impl ExactVandermondeInstance {
    pub fn new(n: u64, m: i64, p: u64) -> Result<Self> {
        if p > n {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= p <= n, got p = {p}, n = {n}"
            )));
        }
        Ok(Self { n, m, p })
    }
}

pub fn verify_vandermonde_exact(inst: ExactVandermondeInstance) -> IdentityReport {
    let ExactVandermondeInstance { n, m, p } = inst;
    let lhs = BigInt::from(binom_exact(n, m));
    let upper = m.max(p as i64);
    let mut rhs = BigInt::zero();
    for k in 0..=upper {
        rhs += BigInt::from(binom_exact(n - p, m - k) * binom_exact(p, k));
    }
    exact_report(
        "vandermonde-exact",
        inputs([("n", n.into()), ("m", m.into()), ("p", p.into())]),
        vec![(format!("n = {n}, m = {m}, p = {p}"), lhs, rhs)],
    )
}

/// Compares the bilateral binomial sum with `(1+z)^x` and with the
/// Gamma-bracket times `1H1[y-x; y+1; -z]` form.
///
/// The primary residual is the direct sum against the principal power. The
/// bracket form (multiplied by `z^y`) and the reading with `z^k` in place of
/// `z^(y+k)` are recorded as auxiliary values.
pub fn verify_bilateral_binomial(
    x: f64,
    y: f64,
    z: ComplexValue,
    policy: &TruncationPolicy,
    tolerance: f64,
) -> Result<IdentityReport> {
    let direct = bilateral_binomial_sum(x, y, z, policy)?;
    let one = ComplexValue::new(1.0, 0.0);
    let power = power_principal(one + z, x)?;
    let mut rep = IdentityReport::compare(
        "bilateral-binomial",
        inputs([
            ("x", x.into()),
            ("y", y.into()),
            ("z_re", z.re.into()),
            ("z_im", z.im.into()),
        ]),
        direct.value,
        power,
        tolerance,
    )
    .with_series("sum_k C(x, y+k) z^(y+k)", direct);

    let z_pow_y = power_principal(z, y)?;
    let bracket_form = (|| -> Result<(ComplexValue, SeriesResult)> {
        let coefficient = binom_signed(x, y)?.try_to_f64()?;
        let series = eval_bilateral(&BilateralSeriesSpec::new([y - x], [y + 1.0], -z), policy)?;
        Ok((series.value * coefficient * z_pow_y, series))
    })();
    match bracket_form {
        Ok((value, series)) => {
            let (abs_residual, rel_residual) = residuals(value, power);
            rep.auxiliary.push(AuxiliaryValue {
                label: "C(x,y) z^y 1H1[y-x; y+1; -z]".into(),
                value,
                abs_residual,
                rel_residual,
                note: None,
            });
            rep = rep.with_series("1H1[y-x; y+1; -z]", series);
        }
        Err(e) => {
            let nan = ComplexValue::new(f64::NAN, f64::NAN);
            rep.auxiliary.push(AuxiliaryValue {
                label: "C(x,y) z^y 1H1[y-x; y+1; -z]".into(),
                value: nan,
                abs_residual: f64::NAN,
                rel_residual: f64::NAN,
                note: Some(e.to_string()),
            });
        }
    }
    let z_k_reading = direct.value / z_pow_y;
    let (abs_residual, rel_residual) = residuals(z_k_reading, power);
    rep.auxiliary.push(AuxiliaryValue {
        label: "sum_k C(x, y+k) z^k".into(),
        value: z_k_reading,
        abs_residual,
        rel_residual,
        note: Some("z^k reading, recorded only".into()),
    });
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussParameters {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl GaussParameters {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// `c + d - a - b - 1`; the series converges absolutely when positive.
    pub fn excess(&self) -> f64 {
        self.c + self.d - self.a - self.b - 1.0
    }

    /// The closed form `Gamma[c, d, 1-a, 1-b, c+d-a-b-1; c-a, d-a, c-b, d-b]`.
    pub fn bracket(&self) -> GammaRatioSpec {
        let Self { a, b, c, d } = *self;
        GammaRatioSpec::new(
            [c, d, 1.0 - a, 1.0 - b, self.excess()],
            [c - a, d - a, c - b, d - b],
        )
    }

    pub fn series(&self) -> BilateralSeriesSpec {
        BilateralSeriesSpec::new(
            [self.a, self.b],
            [self.c, self.d],
            ComplexValue::new(1.0, 0.0),
        )
    }

    /// Convergence margin and lattice distance of all nine bracket arguments.
    /// Denominator arguments exactly on the lattice are allowed (the bracket is zero).
    pub fn check(&self, lattice_margin: f64, convergence_margin: f64) -> Result<()> {
        let excess = self.excess();
        if !(excess >= convergence_margin) {
            return Err(Error::Precondition(format!(
                "c + d - a - b - 1 = {excess} is below the convergence margin {convergence_margin}"
            )));
        }
        let bracket = self.bracket();
        for (name, &v) in ["c", "d", "1-a", "1-b", "c+d-a-b-1"]
            .iter()
            .zip(&bracket.numerator)
        {
            if pole_distance(v) < lattice_margin {
                return Err(Error::Precondition(format!(
                    "{name} = {v} lies within {lattice_margin} of a Gamma pole"
                )));
            }
        }
        for (name, &v) in ["c-a", "d-a", "c-b", "d-b"]
            .iter()
            .zip(&bracket.denominator)
        {
            if !is_pole(v) && pole_distance(v) < lattice_margin {
                return Err(Error::Precondition(format!(
                    "{name} = {v} lies within {lattice_margin} of a Gamma pole"
                )));
            }
        }
        Ok(())
    }
}

/// `2H2[a, b; c, d; 1]` by the series engine against the closed Gamma bracket.
pub fn verify_gauss_2h2(
    params: GaussParameters,
    policy: &TruncationPolicy,
    tolerance: f64,
) -> Result<IdentityReport> {
    params.check(GAUSS_LATTICE_MARGIN, GAUSS_CONVERGENCE_MARGIN)?;
    let series = eval_bilateral(&params.series(), policy)?;
    let closed = gamma_ratio(&params.bracket())?.try_to_f64()?;
    let GaussParameters { a, b, c, d } = params;
    Ok(IdentityReport::compare(
        "gauss-2h2",
        inputs([
            ("a", a.into()),
            ("b", b.into()),
            ("c", c.into()),
            ("d", d.into()),
        ]),
        series.value,
        real(closed),
        tolerance,
    )
    .with_series("2H2[a, b; c, d; 1]", series))
}

/// `C(n, K) = sum over M in M0 + Z of C(n-p, K-M) C(p, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilateralVandermondeInstance {
    pub n: f64,
    pub p: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "M0")]
    pub m0: f64,
}

impl BilateralVandermondeInstance {
    pub fn new(n: f64, p: f64, k: f64, m0: f64) -> Self {
        Self { n, p, k, m0 }
    }

    /// `C(n-p, K-M) C(p, M)` at `M = M0 + j`.
    pub fn term(&self, j: i64) -> Result<SignedLogValue> {
        let m = self.m0 + j as f64;
        Ok(binom_signed(self.n - self.p, self.k - m)? * binom_signed(self.p, m)?)
    }

    /// Series parameters of the sum re-anchored at offset `m`: the term ratio
    /// `(K-M-j)(p-M-j) / ((n-p-K+M+j+1)(M+j+1))` as a `2H2` at `z = 1`.
    pub fn series_at(&self, m: f64) -> BilateralSeriesSpec {
        let Self { n, p, k, .. } = *self;
        BilateralSeriesSpec::new(
            [m - k, m - p],
            [n - p - k + m + 1.0, m + 1.0],
            ComplexValue::new(1.0, 0.0),
        )
    }

    fn check(&self) -> Result<()> {
        let Self { n, p, k, m0 } = *self;
        if ![n, p, k, m0].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        if n <= -1.0 + BILATERAL_DECAY_MARGIN {
            return Err(Error::Precondition(format!(
                "n = {n}: terms decay like |M|^(-n-2), need n > {}",
                -1.0 + BILATERAL_DECAY_MARGIN
            )));
        }
        for (name, v) in [("n-p+1", n - p + 1.0), ("p+1", p + 1.0)] {
            if is_pole(v) {
                return Err(Error::DegenerateParameter(format!(
                    "{name} = {v} is a Gamma pole: every term is infinite or indeterminate"
                )));
            }
        }
        Ok(())
    }
}

const ANCHOR_WINDOW: f64 = 64.0;

/// Sums `C(n-p, K-M) C(p, M)` over `M in M0 + Z` with the outward recurrence,
/// anchored at the nonzero term closest to `M0`.
fn bilateral_vandermonde_sum(
    inst: &BilateralVandermondeInstance,
    policy: &TruncationPolicy,
) -> Result<SeriesResult> {
    inst.check()?;
    let width =
        (ANCHOR_WINDOW + inst.m0.abs() + inst.p.abs() + inst.k.abs() + inst.n.abs()).ceil() as i64;
    let mut anchor = None;
    for step in 0..=2 * width {
        let j = if step % 2 == 0 {
            -(step / 2)
        } else {
            step / 2 + 1
        };
        let t = inst
            .term(j)
            .map_err(|e| Error::DegenerateParameter(format!("term at M = M0 + {j}: {e}")))?;
        if !t.is_zero() {
            anchor = Some((j, t));
            break;
        }
    }
    let Some((j, t0)) = anchor else {
        // One factor has finite support inside the window and the other
        // vanishes on it: every term is exactly zero.
        return Ok(SeriesResult {
            value: ComplexValue::new(0.0, 0.0),
            terms_used: (2 * width + 1) as u64,
            converged: true,
            tail_estimate: 0.0,
            decay_exponent: -inst.n - 2.0,
            classification: Classification::Terminating,
        });
    };
    let t0 = t0.try_to_f64()?;
    let series = eval_bilateral(&inst.series_at(snap(inst.m0 + j as f64)), policy)?;
    Ok(series.scaled(real(t0)))
}

pub fn verify_bilateral_vandermonde(
    inst: BilateralVandermondeInstance,
    policy: &TruncationPolicy,
    tolerance: f64,
) -> Result<IdentityReport> {
    let sum = bilateral_vandermonde_sum(&inst, policy)?;
    let lhs = binom_real(inst.n, inst.k)?;
    Ok(IdentityReport::compare(
        "bilateral-vandermonde",
        inputs([
            ("n", inst.n.into()),
            ("p", inst.p.into()),
            ("K", inst.k.into()),
            ("M0", inst.m0.into()),
        ]),
        real(lhs),
        sum.value,
        tolerance,
    )
    .with_series("sum_M C(n-p, K-M) C(p, M)", sum))
}

/// Which upper parameter pair the `2H2` of the closed form uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Eq18Variant {
    /// Upper pair `(K-M, M-p)`.
    AsPrinted,
    /// Upper pair `(M-K, M-p)`, the one consistent with the term ratio of the
    /// bilateral Vandermonde sum.
    #[default]
    SignCorrected,
}

impl Eq18Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Eq18Variant::AsPrinted => "as-printed",
            Eq18Variant::SignCorrected => "sign-corrected",
        }
    }
}

impl std::str::FromStr for Eq18Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-printed" => Ok(Eq18Variant::AsPrinted),
            "sign-corrected" => Ok(Eq18Variant::SignCorrected),
            other => Err(Error::InvalidArgument(format!(
                "unknown variant {other:?}; expected as-printed or sign-corrected"
            ))),
        }
    }
}

/// `C(n, K) = Gamma[n-p+1, p+1; K-M+1, n-p-K+M+1, M+1, p-M+1] * 2H2[U; n-p-K+M+1, M+1; 1]`
/// for a free real `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eq18Instance {
    pub n: f64,
    pub p: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub variant: Eq18Variant,
}

impl Eq18Instance {
    pub fn new(n: f64, p: f64, k: f64, m: f64, variant: Eq18Variant) -> Self {
        Self {
            n,
            p,
            k,
            m,
            variant,
        }
    }

    pub fn prefactor(&self) -> GammaRatioSpec {
        let Self { n, p, k, m, .. } = *self;
        GammaRatioSpec::new(
            [n - p + 1.0, p + 1.0],
            [k - m + 1.0, n - p - k + m + 1.0, m + 1.0, p - m + 1.0],
        )
    }

    pub fn series(&self) -> BilateralSeriesSpec {
        let Self {
            n,
            p,
            k,
            m,
            variant,
        } = *self;
        let upper = match variant {
            Eq18Variant::AsPrinted => [k - m, m - p],
            Eq18Variant::SignCorrected => [m - k, m - p],
        };
        BilateralSeriesSpec::new(
            upper,
            [n - p - k + m + 1.0, m + 1.0],
            ComplexValue::new(1.0, 0.0),
        )
    }
}

pub fn verify_eq18(
    inst: Eq18Instance,
    policy: &TruncationPolicy,
    tolerance: f64,
) -> Result<IdentityReport> {
    let lhs = binom_real(inst.n, inst.k)?;
    let prefactor = gamma_ratio(&inst.prefactor())?.try_to_f64()?;
    let series = eval_bilateral(&inst.series(), policy)?;
    Ok(IdentityReport::compare(
        "eq18",
        inputs([
            ("n", inst.n.into()),
            ("p", inst.p.into()),
            ("K", inst.k.into()),
            ("M", inst.m.into()),
        ]),
        real(lhs),
        series.value * prefactor,
        tolerance,
    )
    .with_variant(inst.variant.label())
    .with_series("2H2[U; n-p-K+M+1, M+1; 1]", series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::unit_circle;
    use std::f64::consts::PI;

    fn policy() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn binomial_theorem_examples() {
        let r = verify_binomial_theorem(3, &[2]);
        assert!(r.passed);
        assert_eq!(r.exact[0].lhs, "27");
        let r = verify_binomial_theorem(0, &[5]);
        assert!(r.passed);
        assert_eq!(r.exact[0].rhs, "1");
        let r = verify_binomial_theorem(20, &[3, -1, 0]);
        assert!(r.passed);
        assert_eq!(r.exact[0].lhs, "1099511627776");
        assert_eq!(r.exact[1].lhs, "0");
        assert_eq!((r.abs_residual, r.rel_residual), (0.0, 0.0));
    }

    #[test]
    fn vandermonde_exact_examples() {
        let r = verify_vandermonde_exact(ExactVandermondeInstance::new(5, 2, 2).unwrap());
        assert!(r.passed);
        assert_eq!(r.exact[0].lhs, "10");
        assert!(verify_vandermonde_exact(ExactVandermondeInstance::new(7, 3, 0).unwrap()).passed);
        assert!(verify_vandermonde_exact(ExactVandermondeInstance::new(25, 12, 9).unwrap()).passed);
        assert!(verify_vandermonde_exact(ExactVandermondeInstance::new(6, -2, 3).unwrap()).passed);
        assert!(verify_vandermonde_exact(ExactVandermondeInstance::new(6, 9, 3).unwrap()).passed);
        assert!(ExactVandermondeInstance::new(3, 1, 4).is_err());
    }

    #[test]
    fn bilateral_binomial_examples() {
        let one = ComplexValue::new(1.0, 0.0);
        let r = verify_bilateral_binomial(1.0, 0.0, one, &policy(), 1e-6).unwrap();
        assert!(r.passed);
        assert!(r.rel_residual < 1e-14);
        assert!(r.auxiliary[0].rel_residual < 1e-14);

        let r = verify_bilateral_binomial(2.5, 0.3, one, &policy(), 1e-6).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.auxiliary[0].rel_residual < 1e-6);

        let r =
            verify_bilateral_binomial(1.0, 0.5, unit_circle(PI / 3.0), &policy(), 1e-6).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.auxiliary[0].rel_residual < 1e-6, "{r:?}");
        // the z^k reading differs by the phase z^(-1/2)
        assert!(r.auxiliary[1].rel_residual > 0.1);
    }

    #[test]
    fn gauss_examples() {
        let r =
            verify_gauss_2h2(GaussParameters::new(0.5, 0.5, 1.5, 1.5), &policy(), 1e-6).unwrap();
        assert!(r.passed);
        assert!((r.rhs.re - PI * PI / 4.0).abs() < 1e-12);
        assert!(r.rel_residual < 1e-9);

        let err = verify_gauss_2h2(GaussParameters::new(1.0, 1.0, 1.5, 1.5), &policy(), 1e-6);
        assert!(matches!(err, Err(Error::Precondition(_))));

        let r =
            verify_gauss_2h2(GaussParameters::new(0.25, 0.35, 1.2, 1.6), &policy(), 1e-6).unwrap();
        assert!(r.passed);
        assert!((r.rhs.re - 1.379_115_036_695_883_5).abs() < 1e-12);
    }

    #[test]
    fn gauss_near_pole_rejected() {
        let err = verify_gauss_2h2(GaussParameters::new(0.97, 0.1, 2.5, 2.5), &policy(), 1e-6);
        assert!(matches!(err, Err(Error::Precondition(m)) if m.contains("1-a")));
    }

    #[test]
    fn bilateral_vandermonde_examples() {
        let r = verify_bilateral_vandermonde(
            BilateralVandermondeInstance::new(2.0, 1.0, 1.0, 0.0),
            &policy(),
            1e-6,
        )
        .unwrap();
        assert!(r.passed);
        assert_eq!(r.rhs.re, 2.0);

        let lhs = 2.181_643_534_736_108_9;
        for m0 in [0.3, 0.67] {
            let r = verify_bilateral_vandermonde(
                BilateralVandermondeInstance::new(2.5, 1.2, 0.7, m0),
                &policy(),
                1e-6,
            )
            .unwrap();
            assert!(r.passed, "{r:?}");
            assert!((r.lhs.re - lhs).abs() < 1e-12);
        }
    }

    #[test]
    fn bilateral_vandermonde_integer_zero_sum() {
        // C(2, 5) = 0 and every term C(1, 5-M) C(1, M) vanishes
        let r = verify_bilateral_vandermonde(
            BilateralVandermondeInstance::new(2.0, 1.0, 5.0, 0.0),
            &policy(),
            1e-6,
        )
        .unwrap();
        assert!(r.passed);
        assert_eq!(r.rhs.re, 0.0);
        // anchor found away from M0: C(3, 2) with M0 = -4
        let r = verify_bilateral_vandermonde(
            BilateralVandermondeInstance::new(3.0, 1.0, 2.0, -4.0),
            &policy(),
            1e-6,
        )
        .unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.rhs.re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bilateral_vandermonde_degenerate() {
        // n - p = -2: C(-2, .) has an upper pole
        let err = verify_bilateral_vandermonde(
            BilateralVandermondeInstance::new(1.0, 3.0, 0.5, 0.2),
            &policy(),
            1e-6,
        );
        assert!(matches!(err, Err(Error::DegenerateParameter(_))));
    }

    #[test]
    fn free_offset_integer_case_both_variants() {
        let printed = verify_eq18(
            Eq18Instance::new(2.0, 1.0, 1.0, 0.0, Eq18Variant::AsPrinted),
            &policy(),
            1e-6,
        )
        .unwrap();
        assert!(!printed.passed);
        assert_eq!(printed.lhs.re, 2.0);
        assert_eq!(printed.rhs.re, 0.0);
        assert_eq!(printed.abs_residual, 2.0);
        assert_eq!(printed.variant.as_deref(), Some("as-printed"));

        let fixed = verify_eq18(
            Eq18Instance::new(2.0, 1.0, 1.0, 0.0, Eq18Variant::SignCorrected),
            &policy(),
            1e-6,
        )
        .unwrap();
        assert!(fixed.passed);
        assert_eq!(fixed.rhs.re, 2.0);
        assert_eq!(fixed.abs_residual, 0.0);
    }

    #[test]
    fn free_offset_generic_point() {
        let r = verify_eq18(
            Eq18Instance::new(2.5, 1.2, 0.7, 0.3, Eq18Variant::SignCorrected),
            &policy(),
            1e-6,
        )
        .unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.rel_residual < 1e-8);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!(
            "as-printed".parse::<Eq18Variant>().unwrap(),
            Eq18Variant::AsPrinted
        );
        assert!("typo".parse::<Eq18Variant>().is_err());
    }
}
