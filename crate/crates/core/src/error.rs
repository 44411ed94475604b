use thiserror::Error;

/// Failures raised by the numerics, series and verification layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Gamma pole at x = {0}")]
    Pole(f64),

    #[error("infinite value: {0}")]
    InfiniteValue(String),

    #[error("indeterminate Gamma ratio: {0}")]
    IndeterminateRatio(String),

    #[error("overflow: log-magnitude {0} exceeds the double range")]
    Overflow(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("divergent series (decay exponent s = {exponent})")]
    DivergentSeries { exponent: f64 },

    #[error("series converges only conditionally (s = {exponent}); enable allow_conditional")]
    ConditionalRefused { exponent: f64 },

    #[error("degenerate parameters: {0}")]
    DegenerateParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("case {case}: constraints not satisfied after {attempts} draws")]
    UnsatisfiableConstraint { case: usize, attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
