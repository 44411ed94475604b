use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::complex::{serde_complex, ComplexValue};
use crate::series::SeriesResult;

/// Floor on the residual normalization so that exact-zero identities stay finite.
pub const RESIDUAL_FLOOR: f64 = 1e-300;

/// `(|lhs - rhs|, |lhs - rhs| / max(|lhs|, |rhs|, 1e-300))`.
pub fn residuals(lhs: ComplexValue, rhs: ComplexValue) -> (f64, f64) {
    let abs = (lhs - rhs).norm();
    let scale = lhs.norm().max(rhs.norm()).max(RESIDUAL_FLOOR);
    (abs, abs / scale)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesDiagnostic {
    pub label: String,
    pub result: SeriesResult,
}

/// A secondary quantity compared against the right-hand side but not asserted.
#[derive(Debug, Clone, Serialize)]
pub struct AuxiliaryValue {
    pub label: String,
    #[serde(with = "serde_complex")]
    pub value: ComplexValue,
    pub abs_residual: f64,
    pub rel_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Decimal strings of both sides of an exact big-integer comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ExactComparison {
    pub label: String,
    pub lhs: String,
    pub rhs: String,
    pub equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub inputs: BTreeMap<String, Value>,
    #[serde(with = "serde_complex")]
    pub lhs: ComplexValue,
    #[serde(with = "serde_complex")]
    pub rhs: ComplexValue,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<SeriesDiagnostic>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub auxiliary: Vec<AuxiliaryValue>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub exact: Vec<ExactComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl IdentityReport {
    pub fn compare(
        identity: &str,
        inputs: BTreeMap<String, Value>,
        lhs: ComplexValue,
        rhs: ComplexValue,
        tolerance: f64,
    ) -> Self {
        let (abs_residual, rel_residual) = residuals(lhs, rhs);
        Self {
            identity: identity.to_owned(),
            variant: None,
            inputs,
            lhs,
            rhs,
            abs_residual,
            rel_residual,
            tolerance,
            passed: rel_residual <= tolerance,
            diagnostics: Vec::new(),
            auxiliary: Vec::new(),
            exact: Vec::new(),
            error: None,
        }
    }

    /// A failed entry for a case whose evaluation raised an error. Unknown
    /// values are NaN and serialize as `null`.
    pub fn failed(
        identity: &str,
        inputs: BTreeMap<String, Value>,
        tolerance: f64,
        error: String,
    ) -> Self {
        let nan = ComplexValue::new(f64::NAN, f64::NAN);
        Self {
            identity: identity.to_owned(),
            variant: None,
            inputs,
            lhs: nan,
            rhs: nan,
            abs_residual: f64::NAN,
            rel_residual: f64::NAN,
            tolerance,
            passed: false,
            diagnostics: Vec::new(),
            auxiliary: Vec::new(),
            exact: Vec::new(),
            error: Some(error),
        }
    }

    pub fn with_variant(mut self, variant: &str) -> Self {
        self.variant = Some(variant.to_owned());
        self
    }

    pub fn with_series(mut self, label: &str, result: SeriesResult) -> Self {
        self.diagnostics.push(SeriesDiagnostic {
            label: label.to_owned(),
            result,
        });
        self
    }
}

/// Builds the `inputs` record from `(name, value)` pairs.
pub fn inputs<const N: usize>(pairs: [(&str, Value); N]) -> BTreeMap<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}
