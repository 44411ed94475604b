//! Bilateral hypergeometric series `pHp[a; b; z] = sum over all integers nu of
//! prod (a_i)_nu / prod (b_j)_nu * z^nu` on the unit circle.
//!
//! Terms are generated from `t_0 = 1` by the outward recurrences
//!
//! ```text
//! t_{nu+1} / t_nu = z     * prod (a_i + nu)     / prod (b_j + nu)
//! t_{nu-1} / t_nu = z^-1  * prod (b_j + nu - 1) / prod (a_i + nu - 1)
//! ```
//!
//! and summed in symmetric pairs `t_nu + t_{-nu}`. Each side is handled as a
//! one-sided series `u_m` (`m >= 0`) whose ratio has the same shape, so that
//! the negative side is the positive side of the reflected parameters
//! `1 - b_j` over `1 - a_i` with argument `z^-1`.
//!
//! With tail estimation on, the tail is not just bounded but summed
//! asymptotically: Richardson extrapolation over doubling half-widths at
//! `z = 1` (the partial sums approach the limit in powers `N^{s+1-k}`) and a
//! local geometric-envelope correction elsewhere on the circle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{serde_complex, ComplexValue};
use crate::error::{Error, Result};
use crate::numerics::{
    gamma_ratio, ln_gamma_ratio_shifted, pole_index, snap, GammaRatioSpec, SignedLogValue,
    LATTICE_TOLERANCE, SHIFTED_RATIO_MIN_ARGUMENT,
};
use crate::sum::ComplexSum;

/// Allowed deviation of `|z|` from 1.
pub const UNIT_CIRCLE_TOLERANCE: f64 = 1e-12;

const DRIFT_CHECK_INTERVAL: u64 = 10_000;
const DRIFT_TOLERANCE: f64 = 1e-12;
const CHECKPOINT_BASE: u64 = 16;
const MAX_RICHARDSON_LEVELS: usize = 8;
const REQUIRED_STREAK: u32 = 3;
const REQUIRED_CHECKPOINT_STREAK: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Absolute,
    Conditional,
    Divergent,
    Terminating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Acceleration {
    #[default]
    None,
    /// Aitken's delta-squared applied to each side's tail-corrected partial
    /// sums. Only used off `z = 1`, where the tails oscillate.
    PairedAitken,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationPolicy {
    pub rel_tolerance: f64,
    pub max_half_width: u64,
    pub tail_estimation: bool,
    pub allow_conditional: bool,
    pub acceleration: Acceleration,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-8,
            max_half_width: 1_000_000,
            tail_estimation: true,
            allow_conditional: false,
            acceleration: Acceleration::None,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rel_tolerance must be positive, got {}",
                self.rel_tolerance
            )));
        }
        if self.max_half_width < 8 {
            return Err(Error::InvalidArgument(format!(
                "max_half_width must be at least 8, got {}",
                self.max_half_width
            )));
        }
        Ok(())
    }
}

/// Parameters of a bilateral `pHp` series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilateralSeriesSpec {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    #[serde(with = "serde_complex")]
    pub z: ComplexValue,
}

impl BilateralSeriesSpec {
    pub fn new(upper: impl Into<Vec<f64>>, lower: impl Into<Vec<f64>>, z: ComplexValue) -> Self {
        Self {
            upper: upper.into(),
            lower: lower.into(),
            z,
        }
    }

    /// Decay exponent `s` of `|t_nu| ~ |nu|^s`.
    pub fn decay_exponent(&self) -> f64 {
        self.upper.iter().sum::<f64>() - self.lower.iter().sum::<f64>()
    }

    /// The `nu -> -nu` image: upper `1 - b_j`, lower `1 - a_i`, argument `1/z`.
    pub fn reflected(&self) -> Self {
        Self {
            upper: self.lower.iter().map(|b| 1.0 - b).collect(),
            lower: self.upper.iter().map(|a| 1.0 - a).collect(),
            z: self.z.inv(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    #[serde(with = "serde_complex")]
    pub value: ComplexValue,
    pub terms_used: u64,
    pub converged: bool,
    pub tail_estimate: f64,
    pub decay_exponent: f64,
    pub classification: Classification,
}

impl SeriesResult {
    /// The same result multiplied by a constant prefactor.
    pub fn scaled(mut self, factor: ComplexValue) -> Self {
        self.value *= factor;
        self.tail_estimate *= factor.norm();
        self
    }
}

/// Checks `|z| = 1` and snaps `z` onto `±1`, `±i` when it is that close.
pub fn normalize_unit(z: ComplexValue) -> Result<ComplexValue> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "series argument {z} is not finite"
        )));
    }
    let r = z.norm();
    if (r - 1.0).abs() > UNIT_CIRCLE_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "bilateral series need |z| = 1, got |z| = {r}"
        )));
    }
    for exact in [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ] {
        if (z - exact).norm() <= UNIT_CIRCLE_TOLERANCE {
            return Ok(exact);
        }
    }
    Ok(z / r)
}

/// What happens to a one-sided series `u_m` as `m` grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SideShape {
    Open,
    /// `u_m = 0` for every `m > last`.
    Terminates {
        last: u64,
    },
    /// The ratio producing `u_at` divides by zero.
    Pole {
        at: u64,
    },
}

fn side_shape(num: &[f64], den: &[f64]) -> SideShape {
    let zero = num.iter().filter_map(|&a| pole_index(a)).min();
    let pole = den.iter().filter_map(|&b| pole_index(b)).min();
    match (zero, pole) {
        (Some(k), Some(p)) if p < k => SideShape::Pole { at: p + 1 },
        (Some(k), _) => SideShape::Terminates { last: k },
        (None, Some(p)) => SideShape::Pole { at: p + 1 },
        (None, None) => SideShape::Open,
    }
}

/// `u_0 = 1`, `u_{m+1} / u_m = w * prod(num + m) / prod(den + m)`.
#[derive(Debug, Clone)]
struct OneSided {
    num: Vec<f64>,
    den: Vec<f64>,
    w: ComplexValue,
    shape: SideShape,
}

impl OneSided {
    fn new(num: Vec<f64>, den: Vec<f64>, w: ComplexValue) -> Self {
        let shape = side_shape(&num, &den);
        Self { num, den, w, shape }
    }

    fn real_ratio(&self, m: f64) -> f64 {
        let n: f64 = self.num.iter().map(|a| a + m).product();
        let d: f64 = self.den.iter().map(|b| b + m).product();
        n / d
    }
}

/// Parameters after snapping and pairwise cancellation, split into both sides.
#[derive(Debug, Clone)]
struct PreparedSeries {
    z: ComplexValue,
    exponent: f64,
    forward: OneSided,
    backward: OneSided,
}

fn cancel_matching(upper: &[f64], lower: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut upper: Vec<f64> = upper.iter().map(|&a| snap(a)).collect();
    let mut lower: Vec<f64> = lower.iter().map(|&b| snap(b)).collect();
    let mut i = 0;
    while i < upper.len() {
        if let Some(j) = lower
            .iter()
            .position(|&b| (b - upper[i]).abs() <= LATTICE_TOLERANCE)
        {
            upper.remove(i);
            lower.remove(j);
        } else {
            i += 1;
        }
    }
    (upper, lower)
}

impl PreparedSeries {
    fn new(spec: &BilateralSeriesSpec) -> Result<Self> {
        if spec.upper.len() != spec.lower.len() {
            return Err(Error::InvalidArgument(format!(
                "only pHp series are supported, got {} upper and {} lower parameters",
                spec.upper.len(),
                spec.lower.len()
            )));
        }
        if let Some(bad) = spec
            .upper
            .iter()
            .chain(&spec.lower)
            .find(|x| !x.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "series parameter {bad} is not finite"
            )));
        }
        let z = normalize_unit(spec.z)?;
        let (upper, lower) = cancel_matching(&spec.upper, &spec.lower);
        let exponent = spec.decay_exponent();
        let backward = OneSided::new(
            lower.iter().map(|b| 1.0 - b).collect(),
            upper.iter().map(|a| 1.0 - a).collect(),
            z.conj(),
        );
        let forward = OneSided::new(upper, lower, z);
        Ok(Self {
            z,
            exponent,
            forward,
            backward,
        })
    }

    fn z_is_one(&self) -> bool {
        self.z == Complex64::new(1.0, 0.0)
    }

    fn classification(&self) -> Classification {
        let terminates = |s: &OneSided| matches!(s.shape, SideShape::Terminates { .. });
        if terminates(&self.forward) && terminates(&self.backward) {
            Classification::Terminating
        } else if self.exponent < -1.0 {
            Classification::Absolute
        } else if self.exponent < 0.0 && !self.z_is_one() {
            Classification::Conditional
        } else {
            Classification::Divergent
        }
    }
}

/// Convergence class from the term asymptotics `|t_nu| ~ |nu|^s`,
/// `s = sum(upper) - sum(lower)`.
pub fn classify_convergence(spec: &BilateralSeriesSpec) -> Result<Classification> {
    Ok(PreparedSeries::new(spec)?.classification())
}

/// Exact reference for `u_m` used to undo rounding drift of the recurrence.
struct DriftReference {
    constant: SignedLogValue,
    min_param: f64,
}

impl DriftReference {
    fn new(side: &OneSided) -> Option<Self> {
        if side.shape != SideShape::Open {
            return None;
        }
        // u_m = prod Gamma(num_i + m) / Gamma(den_i + m) * prod Gamma(den_i) / Gamma(num_i)
        let constant =
            gamma_ratio(&GammaRatioSpec::new(side.den.clone(), side.num.clone())).ok()?;
        let min_param = side
            .num
            .iter()
            .chain(&side.den)
            .copied()
            .fold(f64::INFINITY, f64::min);
        Some(Self {
            constant,
            min_param,
        })
    }

    fn at(&self, side: &OneSided, m: u64) -> Option<SignedLogValue> {
        let m = m as f64;
        if m + self.min_param < SHIFTED_RATIO_MIN_ARGUMENT {
            return None;
        }
        let log: f64 = side
            .num
            .iter()
            .zip(&side.den)
            .map(|(&a, &b)| ln_gamma_ratio_shifted(m, a, b))
            .sum();
        Some(self.constant * SignedLogValue::new(1, log))
    }
}

struct SideState<'a> {
    side: &'a OneSided,
    index: u64,
    real: f64,
    phase: ComplexValue,
    sum: ComplexSum,
    active: bool,
    reference: Option<DriftReference>,
}

impl<'a> SideState<'a> {
    fn new(side: &'a OneSided) -> Self {
        Self {
            side,
            index: 0,
            real: 1.0,
            phase: Complex64::new(1.0, 0.0),
            sum: ComplexSum::new(),
            active: true,
            reference: DriftReference::new(side),
        }
    }

    fn term(&self) -> ComplexValue {
        if self.active {
            self.phase * self.real
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// `u_{m+1} / u_m` at the current index.
    fn next_ratio(&self) -> ComplexValue {
        self.side.w * self.side.real_ratio(self.index as f64)
    }

    /// Moves to the next term. Returns `None` once the side has terminated.
    fn advance(&mut self) -> Result<Option<ComplexValue>> {
        if !self.active {
            return Ok(None);
        }
        let m = self.index;
        if let SideShape::Terminates { last } = self.side.shape {
            if m >= last {
                self.active = false;
                return Ok(None);
            }
        }
        self.real *= self.side.real_ratio(m as f64);
        self.phase *= self.side.w;
        self.index = m + 1;
        if !self.real.is_finite() {
            return Err(Error::DegenerateParameter(format!(
                "term {} of the series is not finite",
                self.index
            )));
        }
        if self.index % DRIFT_CHECK_INTERVAL == 0 {
            self.correct_drift();
        }
        let t = self.phase * self.real;
        self.sum.add(t);
        Ok(Some(t))
    }

    fn correct_drift(&mut self) {
        self.phase /= self.phase.norm();
        let Some(reference) = self
            .reference
            .as_ref()
            .and_then(|r| r.at(self.side, self.index))
        else {
            return;
        };
        let current = SignedLogValue::from_f64(self.real);
        if current.relative_difference(&reference) > DRIFT_TOLERANCE {
            self.real = reference.to_f64();
        }
    }

    /// Geometric-envelope estimate of `sum_{k > m} u_k`.
    fn tail_correction(&self) -> ComplexValue {
        if !self.active {
            return Complex64::new(0.0, 0.0);
        }
        let rho = self.next_ratio();
        let denom = Complex64::new(1.0, 0.0) - rho;
        if denom.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.term() * rho / denom
    }

    /// Plain bound on the omitted mass for a geometric-like tail.
    fn geometric_bound(&self) -> f64 {
        if !self.active {
            return 0.0;
        }
        let denom = (Complex64::new(1.0, 0.0) - self.next_ratio()).norm();
        self.term().norm() / denom.max(f64::MIN_POSITIVE)
    }
}

/// Richardson table over partial sums at `N, 2N, 4N, ...` for an error
/// expansion in `N^{e}, N^{e-1}, ...`.
struct Richardson {
    leading: f64,
    previous_row: Vec<ComplexValue>,
    previous_best: Option<ComplexValue>,
}

impl Richardson {
    fn new(leading: f64) -> Self {
        Self {
            leading,
            previous_row: Vec::new(),
            previous_best: None,
        }
    }

    /// Adds the next partial sum; returns the extrapolated value and the
    /// change from the previous extrapolation.
    fn push(&mut self, partial: ComplexValue) -> (ComplexValue, f64) {
        let levels = self.previous_row.len().min(MAX_RICHARDSON_LEVELS);
        let mut row = Vec::with_capacity(levels + 1);
        row.push(partial);
        for k in 1..=levels {
            let f = (self.leading - (k - 1) as f64).exp2();
            let v = (row[k - 1] - self.previous_row[k - 1] * f) / (1.0 - f);
            row.push(v);
        }
        let best = *row.last().unwrap();
        let err = match self.previous_best {
            Some(prev) => (best - prev).norm(),
            None => f64::INFINITY,
        };
        self.previous_best = Some(best);
        self.previous_row = row;
        (best, err)
    }
}

fn aitken(seq: &[ComplexValue; 3]) -> ComplexValue {
    let d1 = seq[1] - seq[0];
    let d2 = seq[2] - seq[1];
    let dd = d2 - d1;
    if dd.norm() <= f64::EPSILON * seq[2].norm() {
        seq[2]
    } else {
        seq[2] - d2 * d2 / dd
    }
}

fn fit_exponent(checkpoints: &[(u64, f64)], fallback: f64) -> f64 {
    let Some(&(n2, m2)) = checkpoints.last() else {
        return fallback;
    };
    let earlier = checkpoints
        .iter()
        .rev()
        .find(|&&(n, m)| 2 * n <= n2 && m > 0.0);
    match earlier {
        Some(&(n1, m1)) if m2 > 0.0 => (m2 / m1).ln() / (n2 as f64 / n1 as f64).ln(),
        _ => fallback,
    }
}

struct Outcome {
    value: ComplexValue,
    converged: bool,
    tail_estimate: f64,
}

fn sum_prepared(
    prep: &PreparedSeries,
    policy: &TruncationPolicy,
    classification: Classification,
) -> Result<SeriesResult> {
    let tol = policy.rel_tolerance;
    let mut fwd = SideState::new(&prep.forward);
    let mut bwd = SideState::new(&prep.backward);
    let one = Complex64::new(1.0, 0.0);
    let mut total = ComplexSum::new();
    total.add(one);
    let mut terms_used: u64 = 1;

    let richardson_mode = prep.z_is_one() && policy.tail_estimation;
    let aitken_mode = !prep.z_is_one() && policy.acceleration == Acceleration::PairedAitken;
    let corrected_mode = !prep.z_is_one() && (policy.tail_estimation || aitken_mode);
    let circle_gap = (one - prep.z).norm();

    let mut richardson = Richardson::new(prep.exponent + 1.0);
    let mut checkpoints: Vec<(u64, f64)> = Vec::new();
    let mut next_checkpoint = CHECKPOINT_BASE;
    let mut streak = 0u32;
    let mut previous_estimate: Option<ComplexValue> = None;
    let mut history: [Vec<ComplexValue>; 2] = [Vec::new(), Vec::new()];

    let mut outcome = Outcome {
        value: one,
        converged: false,
        tail_estimate: f64::INFINITY,
    };
    let mut last_nu = 0;

    for nu in 1..=policy.max_half_width {
        last_nu = nu;
        let tf = fwd.advance()?;
        let tb = bwd.advance()?;
        let (tf, tb) = (tf.unwrap_or_default(), tb.unwrap_or_default());
        terms_used += u64::from(fwd.active) + u64::from(bwd.active);
        total.add(tf + tb);
        let partial = total.value();

        if !fwd.active && !bwd.active {
            // Every remaining term is exactly zero.
            return Ok(SeriesResult {
                value: partial,
                terms_used,
                converged: true,
                tail_estimate: 0.0,
                decay_exponent: prep.exponent,
                classification,
            });
        }

        let at_checkpoint = nu == next_checkpoint;
        if at_checkpoint {
            checkpoints.push((nu, tf.norm() + tb.norm()));
            next_checkpoint *= 2;
        }

        if richardson_mode {
            if at_checkpoint {
                let (best, err) = richardson.push(partial);
                outcome.value = best;
                outcome.tail_estimate = err;
                if checkpoints.len() >= 4 && err <= tol * best.norm() {
                    streak += 1;
                } else {
                    streak = 0;
                }
                if streak >= REQUIRED_CHECKPOINT_STREAK {
                    outcome.converged = true;
                    break;
                }
            }
        } else if corrected_mode {
            let mut estimate = one;
            for (slot, side) in [&fwd, &bwd].into_iter().enumerate() {
                let mut level = side.sum.value();
                if policy.tail_estimation {
                    level += side.tail_correction();
                }
                if aitken_mode {
                    let h = &mut history[slot];
                    h.push(level);
                    if h.len() > 3 {
                        h.remove(0);
                    }
                    if let [a, b, c] = h[..] {
                        level = aitken(&[a, b, c]);
                    }
                }
                estimate += level;
            }
            let err = previous_estimate
                .map(|p| (estimate - p).norm() / circle_gap)
                .unwrap_or(f64::INFINITY);
            previous_estimate = Some(estimate);
            outcome.value = estimate;
            outcome.tail_estimate = err;
            if nu >= 8 && err <= tol * estimate.norm() {
                streak += 1;
            } else {
                streak = 0;
            }
            if streak >= REQUIRED_STREAK {
                outcome.converged = true;
                break;
            }
        } else {
            let tail = if prep.z_is_one() {
                let s = prep.exponent;
                (tf.norm() + tb.norm()) * nu as f64 / (-s - 1.0)
            } else {
                fwd.geometric_bound() + bwd.geometric_bound()
            };
            outcome.value = partial;
            outcome.tail_estimate = tail;
            let scale = partial.norm();
            let small_terms = tf.norm().max(tb.norm()) <= 0.1 * tol * scale;
            if small_terms && tail <= tol * scale {
                streak += 1;
            } else {
                streak = 0;
            }
            if streak >= REQUIRED_STREAK {
                outcome.converged = true;
                break;
            }
        }
    }

    if last_nu != checkpoints.last().map_or(0, |c| c.0) {
        checkpoints.push((last_nu, fwd.term().norm() + bwd.term().norm()));
    }
    Ok(SeriesResult {
        value: outcome.value,
        terms_used,
        converged: outcome.converged,
        tail_estimate: outcome.tail_estimate,
        decay_exponent: fit_exponent(&checkpoints, prep.exponent),
        classification,
    })
}

/// Evaluates a bilateral series on the unit circle.
pub fn eval_bilateral(
    spec: &BilateralSeriesSpec,
    policy: &TruncationPolicy,
) -> Result<SeriesResult> {
    policy.validate()?;
    let prep = PreparedSeries::new(spec)?;
    let classification = prep.classification();
    match classification {
        Classification::Divergent => {
            return Err(Error::DivergentSeries {
                exponent: prep.exponent,
            })
        }
        Classification::Conditional if !policy.allow_conditional => {
            return Err(Error::ConditionalRefused {
                exponent: prep.exponent,
            })
        }
        _ => {}
    }
    for (label, side) in [("positive", &prep.forward), ("negative", &prep.backward)] {
        if let SideShape::Pole { at } = side.shape {
            return Err(Error::DegenerateParameter(format!(
                "term {at} on the {label} side divides by a zero lower-parameter factor"
            )));
        }
    }
    sum_prepared(&prep, policy, classification)
}

/// `w^e = exp(e Log w)` on the principal branch, `arg w` in `(-pi, pi]`.
pub fn power_principal(w: ComplexValue, e: f64) -> Result<ComplexValue> {
    if w == Complex64::new(0.0, 0.0) {
        return if e > 0.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::InvalidArgument(format!("0 raised to the power {e}")))
        };
    }
    if e == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    // num-complex's ln returns arg in (-pi, pi]; keep -0.0 imaginary parts off the cut.
    let w = Complex64::new(w.re, if w.im == 0.0 { 0.0 } else { w.im });
    Ok((w.ln() * e).exp())
}

/// Starting index `y'` in `y + Z` for which `C(x, y')` is a regular nonzero
/// anchor for the term recurrence.
fn binomial_anchor(x: f64, y: f64) -> f64 {
    let y = snap(y);
    if y.fract() == 0.0 {
        0.0
    } else if snap(x - y).fract() == 0.0 {
        x
    } else {
        y
    }
}

/// `sum_{k in Z} C(x, y + k) z^{y + k}` with the principal branch of `z^{y+k}`.
///
/// The identity asserts this equals `(1 + z)^x`.
pub fn bilateral_binomial_sum(
    x: f64,
    y: f64,
    z: ComplexValue,
    policy: &TruncationPolicy,
) -> Result<SeriesResult> {
    let z = normalize_unit(z)?;
    if z == Complex64::new(-1.0, 0.0) {
        return Err(Error::InvalidArgument(
            "z = -1 is outside the bilateral binomial theorem".into(),
        ));
    }
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "x = {x}, y = {y} must be finite"
        )));
    }
    if x <= -0.95 {
        return Err(Error::InvalidArgument(format!(
            "x = {x}: terms decay like |k|^(-x-1), need x > -0.95"
        )));
    }
    let anchor = binomial_anchor(x, y);
    let coefficient = crate::binomial::binom_real(x, anchor)?;
    let spec = BilateralSeriesSpec::new([anchor - x], [anchor + 1.0], -z);
    let prefactor = power_principal(z, anchor)? * coefficient;
    Ok(eval_bilateral(&spec, policy)?.scaled(prefactor))
}
