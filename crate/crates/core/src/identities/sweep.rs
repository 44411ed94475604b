//! Seeded random sweeps over an identity's parameter space.
//!
//! Case `i` draws its parameters from a `ChaCha8Rng` seeded with `seed ^ i`,
//! one uniform `f64` per symbol in alphabetical order, so a case never
//! depends on the others or on evaluation order.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    inputs, verify_bilateral_binomial, verify_bilateral_vandermonde, verify_binomial_theorem,
    verify_eq18, verify_gauss_2h2, verify_vandermonde_exact, BilateralVandermondeInstance,
    Eq18Instance, Eq18Variant, ExactVandermondeInstance, GaussParameters, IdentityReport,
    DEFAULT_TOLERANCE,
};
use crate::complex::{unit_circle, ComplexValue};
use crate::error::{Error, Result};
use crate::numerics::pole_distance;
use crate::series::TruncationPolicy;

/// Draws per case before giving up on the margin constraints.
pub const MAX_DRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityKind {
    BinomialTheorem,
    VandermondeExact,
    BilateralBinomial,
    #[serde(rename = "gauss-2h2")]
    Gauss2H2,
    BilateralVandermonde,
    Eq18,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 6] = [
        IdentityKind::BinomialTheorem,
        IdentityKind::VandermondeExact,
        IdentityKind::BilateralBinomial,
        IdentityKind::Gauss2H2,
        IdentityKind::BilateralVandermonde,
        IdentityKind::Eq18,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentityKind::BinomialTheorem => "binomial-theorem",
            IdentityKind::VandermondeExact => "vandermonde-exact",
            IdentityKind::BilateralBinomial => "bilateral-binomial",
            IdentityKind::Gauss2H2 => "gauss-2h2",
            IdentityKind::BilateralVandermonde => "bilateral-vandermonde",
            IdentityKind::Eq18 => "eq18",
        }
    }

    fn required(&self) -> &'static [&'static str] {
        match self {
            IdentityKind::BinomialTheorem => &["n", "x"],
            IdentityKind::VandermondeExact => &["m", "n", "p"],
            IdentityKind::BilateralBinomial => &["x", "y"],
            IdentityKind::Gauss2H2 => &["a", "b", "c"],
            IdentityKind::BilateralVandermonde => &["K", "M0", "n", "p"],
            IdentityKind::Eq18 => &["K", "M", "n", "p"],
        }
    }

    fn optional(&self) -> &'static [&'static str] {
        match self {
            IdentityKind::BilateralBinomial => &["z_arg", "z_im", "z_re"],
            IdentityKind::Gauss2H2 => &["d", "excess"],
            _ => &[],
        }
    }
}

impl std::str::FromStr for IdentityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = IdentityKind::ALL.iter().map(|k| k.name()).collect();
                Error::Config(format!(
                    "unknown identity {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Margins {
    pub lattice: f64,
    pub convergence: f64,
}

impl Default for Margins {
    fn default() -> Self {
        Self {
            lattice: 0.05,
            convergence: 0.05,
        }
    }
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_parallel() -> bool {
    true
}

/// A sweep description, read from JSON.
///
/// `ranges` maps each symbol to a closed interval `[lo, hi]`. Integer
/// identities round their draws. A `gauss-2h2` sweep takes either `d` or
/// `excess` (the value of `c + d - a - b - 1`, from which `d` is derived).
/// A `bilateral-binomial` sweep uses `z = 1` unless `z_arg` or `z_re`/`z_im`
/// are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub identity: IdentityKind,
    pub cases: usize,
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    pub ranges: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub policy: TruncationPolicy,
    #[serde(default)]
    pub margins: Margins,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Eq18Variant>,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

impl SweepConfig {
    pub fn new(
        identity: IdentityKind,
        cases: usize,
        seed: u64,
        ranges: &[(&str, [f64; 2])],
    ) -> Self {
        Self {
            identity,
            cases,
            seed,
            tolerance: DEFAULT_TOLERANCE,
            ranges: ranges.iter().map(|(k, r)| ((*k).to_owned(), *r)).collect(),
            policy: TruncationPolicy::default(),
            margins: Margins::default(),
            variant: None,
            parallel: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.margins.lattice >= 0.0 && self.margins.convergence >= 0.0) {
            return Err(Error::Config("margins must be non-negative".into()));
        }
        self.policy
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        let required = self.identity.required();
        let optional = self.identity.optional();
        for name in required {
            if !self.ranges.contains_key(*name) {
                return Err(Error::Config(format!(
                    "{} sweep needs a range for {name:?}",
                    self.identity.name()
                )));
            }
        }
        for (name, [lo, hi]) in &self.ranges {
            if !required.contains(&name.as_str()) && !optional.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "symbol {name:?} is not a parameter of {}",
                    self.identity.name()
                )));
            }
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Config(format!(
                    "range for {name:?} must satisfy lo <= hi, got [{lo}, {hi}]"
                )));
            }
        }
        let has = |k: &str| self.ranges.contains_key(k);
        match self.identity {
            IdentityKind::Gauss2H2 if has("d") == has("excess") => {
                return Err(Error::Config(
                    "gauss-2h2 sweep needs exactly one of \"d\" and \"excess\"".into(),
                ));
            }
            IdentityKind::BilateralBinomial if has("z_arg") && (has("z_re") || has("z_im")) => {
                return Err(Error::Config(
                    "give either z_arg or z_re/z_im, not both".into(),
                ));
            }
            IdentityKind::BilateralBinomial if has("z_re") != has("z_im") => {
                return Err(Error::Config("z_re and z_im must be given together".into()));
            }
            IdentityKind::VandermondeExact | IdentityKind::BinomialTheorem => {
                for name in ["n", "p"] {
                    if let Some([lo, _]) = self.ranges.get(name) {
                        if lo.round() < 0.0 {
                            return Err(Error::Config(format!("{name} must be non-negative")));
                        }
                    }
                }
            }
            _ => {}
        }
        if self.variant.is_some() && self.identity != IdentityKind::Eq18 {
            return Err(Error::Config("variant only applies to eq18".into()));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> BTreeMap<String, f64> {
        self.ranges
            .iter()
            .map(|(name, [lo, hi])| (name.clone(), lo + (hi - lo) * rng.gen::<f64>()))
            .collect()
    }
}

fn frac_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

enum Case {
    Ready(
        Box<dyn FnOnce() -> Result<IdentityReport> + Send>,
        BTreeMap<String, Value>,
    ),
    Rejected,
}

fn build_case(config: &SweepConfig, d: &BTreeMap<String, f64>) -> Case {
    let g = |k: &str| d[k];
    let lat = config.margins.lattice;
    let conv = config.margins.convergence;
    let policy = config.policy;
    let tol = config.tolerance;
    match config.identity {
        IdentityKind::BinomialTheorem => {
            let (n, x) = (g("n").round() as u64, g("x").round() as i64);
            Case::Ready(
                Box::new(move || Ok(verify_binomial_theorem(n, &[x]))),
                inputs([("n", n.into()), ("x", vec![x].into())]),
            )
        }
        IdentityKind::VandermondeExact => {
            let (n, m, p) = (
                g("n").round() as u64,
                g("m").round() as i64,
                g("p").round() as u64,
            );
            match ExactVandermondeInstance::new(n, m, p) {
                Ok(inst) => Case::Ready(
                    Box::new(move || Ok(verify_vandermonde_exact(inst))),
                    inputs([("n", n.into()), ("m", m.into()), ("p", p.into())]),
                ),
                Err(_) => Case::Rejected,
            }
        }
        IdentityKind::BilateralBinomial => {
            let (x, y) = (g("x"), g("y"));
            let z = match (d.get("z_arg"), d.get("z_re"), d.get("z_im")) {
                (Some(&theta), _, _) => unit_circle(theta),
                (None, Some(&re), Some(&im)) => ComplexValue::new(re, im),
                _ => ComplexValue::new(1.0, 0.0),
            };
            if x + 1.0 < conv || pole_distance(x + 1.0) < lat {
                return Case::Rejected;
            }
            Case::Ready(
                Box::new(move || verify_bilateral_binomial(x, y, z, &policy, tol)),
                inputs([
                    ("x", x.into()),
                    ("y", y.into()),
                    ("z_re", z.re.into()),
                    ("z_im", z.im.into()),
                ]),
            )
        }
        IdentityKind::Gauss2H2 => {
            let (a, b, c) = (g("a"), g("b"), g("c"));
            let d_val = match d.get("excess") {
                Some(&e) => e + a + b + 1.0 - c,
                None => g("d"),
            };
            let params = GaussParameters::new(a, b, c, d_val);
            if params.check(lat, conv).is_err() {
                return Case::Rejected;
            }
            Case::Ready(
                Box::new(move || verify_gauss_2h2(params, &policy, tol)),
                inputs([
                    ("a", a.into()),
                    ("b", b.into()),
                    ("c", c.into()),
                    ("d", d_val.into()),
                ]),
            )
        }
        IdentityKind::BilateralVandermonde => {
            let inst = BilateralVandermondeInstance::new(g("n"), g("p"), g("K"), g("M0"));
            if !vandermonde_margins_ok(inst.n, inst.p, inst.k, inst.m0, lat, conv) {
                return Case::Rejected;
            }
            Case::Ready(
                Box::new(move || verify_bilateral_vandermonde(inst, &policy, tol)),
                inputs([
                    ("n", inst.n.into()),
                    ("p", inst.p.into()),
                    ("K", inst.k.into()),
                    ("M0", inst.m0.into()),
                ]),
            )
        }
        IdentityKind::Eq18 => {
            let variant = config.variant.unwrap_or_default();
            let inst = Eq18Instance::new(g("n"), g("p"), g("K"), g("M"), variant);
            if !vandermonde_margins_ok(inst.n, inst.p, inst.k, inst.m, lat, conv) {
                return Case::Rejected;
            }
            Case::Ready(
                Box::new(move || verify_eq18(inst, &policy, tol)),
                inputs([
                    ("n", inst.n.into()),
                    ("p", inst.p.into()),
                    ("K", inst.k.into()),
                    ("M", inst.m.into()),
                ]),
            )
        }
    }
}

/// Margins for `sum_M C(n-p, K-M) C(p, M)`: convergence needs `n + 1` clear
/// of zero, and every Gamma argument of every term stays clear of the pole
/// lattice, which for the `M`-dependent ones means clear of all integers.
fn vandermonde_margins_ok(n: f64, p: f64, k: f64, m: f64, lat: f64, conv: f64) -> bool {
    n + 1.0 >= conv
        && pole_distance(n - p + 1.0) >= lat
        && pole_distance(p + 1.0) >= lat
        && [m, k - m, p - m, n - p - k + m]
            .iter()
            .all(|&v| frac_distance(v) >= lat)
}

fn prepare_case(config: &SweepConfig, index: usize) -> Result<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ index as u64);
    for _ in 0..MAX_DRAWS {
        let draw = config.draw(&mut rng);
        if let case @ Case::Ready(..) = build_case(config, &draw) {
            return Ok(case);
        }
    }
    Err(Error::UnsatisfiableConstraint {
        case: index,
        attempts: MAX_DRAWS,
    })
}

fn evaluate(config: &SweepConfig, case: Case) -> IdentityReport {
    let Case::Ready(run, inputs) = case else {
        unreachable!("rejected cases are redrawn")
    };
    let mut report = run().unwrap_or_else(|e| {
        IdentityReport::failed(
            config.identity.name(),
            inputs,
            config.tolerance,
            e.to_string(),
        )
    });
    if config.identity == IdentityKind::Eq18 && report.variant.is_none() {
        report.variant = Some(config.variant.unwrap_or_default().label().to_owned());
    }
    report
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub cases: Vec<IdentityReport>,
    pub case_count: usize,
    pub pass_count: usize,
    pub error_count: usize,
    pub worst_rel_residual: f64,
    pub runtime_seconds: f64,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.pass_count == self.case_count
    }

    /// Canonical JSON of the report without the timing field.
    pub fn body_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report is serializable");
        if let Value::Object(map) = &mut value {
            map.remove("runtime_seconds");
        }
        serde_json::to_string_pretty(&value).expect("value is serializable")
    }

    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report is serializable");
        serde_json::to_string_pretty(&value).expect("value is serializable")
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let start = Instant::now();
    let prepared = (0..config.cases)
        .map(|i| prepare_case(config, i))
        .collect::<Result<Vec<_>>>()?;
    let cases: Vec<IdentityReport> = if config.parallel {
        prepared
            .into_par_iter()
            .map(|c| evaluate(config, c))
            .collect()
    } else {
        prepared.into_iter().map(|c| evaluate(config, c)).collect()
    };
    let pass_count = cases.iter().filter(|c| c.passed).count();
    let error_count = cases.iter().filter(|c| c.error.is_some()).count();
    let worst_rel_residual = if error_count > 0 {
        f64::NAN
    } else {
        cases.iter().map(|c| c.rel_residual).fold(0.0, f64::max)
    };
    Ok(SweepReport {
        config: config.clone(),
        case_count: cases.len(),
        cases,
        pass_count,
        error_count,
        worst_rel_residual,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_fixed_vandermonde_case() {
        let config = SweepConfig::new(
            IdentityKind::VandermondeExact,
            1,
            7,
            &[("n", [5.0, 5.0]), ("m", [2.0, 2.0]), ("p", [2.0, 2.0])],
        );
        let report = run_sweep(&config).unwrap();
        assert_eq!(report.case_count, 1);
        assert_eq!(report.pass_count, 1);
        assert_eq!(report.cases[0].exact[0].lhs, "10");
    }

    #[test]
    fn repeated_runs_are_identical() {
        let mut config = SweepConfig::new(
            IdentityKind::BilateralVandermonde,
            6,
            99,
            &[
                ("n", [0.5, 4.0]),
                ("p", [-1.5, 2.5]),
                ("K", [-2.0, 2.0]),
                ("M0", [0.0, 1.0]),
            ],
        );
        let a = run_sweep(&config).unwrap().body_json();
        config.parallel = false;
        let b = run_sweep(&config).unwrap().body_json();
        config.parallel = true;
        assert_eq!(a, b.replace("\"parallel\": false", "\"parallel\": true"));
        assert_eq!(a, run_sweep(&config).unwrap().body_json());
    }

    #[test]
    fn case_draws_are_per_index() {
        let config = SweepConfig::new(
            IdentityKind::BilateralBinomial,
            4,
            5,
            &[("x", [0.5, 4.0]), ("y", [-2.0, 2.0])],
        );
        let mut shorter = config.clone();
        shorter.cases = 2;
        let long = run_sweep(&config).unwrap();
        let short = run_sweep(&shorter).unwrap();
        assert_eq!(long.cases[1].inputs, short.cases[1].inputs);
        assert_ne!(long.cases[0].inputs, long.cases[1].inputs);
    }

    #[test]
    fn config_errors() {
        let bad = [
            r#"{"identity": "nope", "cases": 1, "seed": 0, "ranges": {}}"#,
            r#"{"identity": "gauss-2h2", "cases": 1, "seed": 0, "ranges": {"a": [0, 1], "b": [0, 1], "c": [1, 2]}}"#,
            r#"{"identity": "eq18", "cases": 1, "seed": 0, "ranges": {"n": [1, 2]}}"#,
            r#"{"identity": "eq18", "cases": 1, "seed": 0, "ranges": {"n": [1, 2], "p": [0, 1], "K": [0, 1], "M": [2, 1]}}"#,
            r#"{"identity": "vandermonde-exact", "cases": 1, "seed": 0, "ranges": {"n": [1, 2], "m": [0, 1], "p": [0, 1], "q": [0, 1]}}"#,
            r#"{"identity": "vandermonde-exact", "cases": 1, "seed": 0, "bogus": 1, "ranges": {}}"#,
        ];
        for text in bad {
            assert!(
                matches!(SweepConfig::from_json(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn unsatisfiable_margins() {
        // c + d - a - b - 1 = -0.5 for every draw
        let config = SweepConfig::new(
            IdentityKind::Gauss2H2,
            2,
            1,
            &[
                ("a", [0.5, 0.5]),
                ("b", [0.5, 0.5]),
                ("c", [1.0, 1.0]),
                ("d", [0.5, 0.5]),
            ],
        );
        assert_eq!(
            run_sweep(&config).unwrap_err(),
            Error::UnsatisfiableConstraint {
                case: 0,
                attempts: MAX_DRAWS
            }
        );
    }

    #[test]
    fn gauss_sweep_with_excess() {
        let config = SweepConfig::new(
            IdentityKind::Gauss2H2,
            8,
            42,
            &[
                ("a", [-1.0, 1.0]),
                ("b", [-1.0, 1.0]),
                ("c", [0.5, 3.0]),
                ("excess", [1.0, 3.0]),
            ],
        );
        let report = run_sweep(&config).unwrap();
        assert_eq!(report.pass_count, 8, "{}", report.body_json());
        for case in &report.cases {
            let g = |k: &str| case.inputs[k].as_f64().unwrap();
            let excess = g("c") + g("d") - g("a") - g("b") - 1.0;
            assert!((1.0 - 1e-12..=3.0 + 1e-12).contains(&excess));
        }
    }

    #[test]
    fn free_offset_sweep_labels_variant() {
        let mut config = SweepConfig::new(
            IdentityKind::Eq18,
            3,
            3,
            &[
                ("n", [0.5, 4.0]),
                ("p", [-1.5, 2.5]),
                ("K", [-2.0, 2.0]),
                ("M", [0.0, 1.0]),
            ],
        );
        config.variant = Some(Eq18Variant::AsPrinted);
        let report = run_sweep(&config).unwrap();
        assert!(report
            .cases
            .iter()
            .all(|c| c.variant.as_deref() == Some("as-printed")));
    }
}
