use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector has zero or non-finite norm")]
    DegenerateVector,

    #[error("vector is not unit norm (norm = {0})")]
    NotUnit(f64),

    #[error("inverse temperature must be positive and finite, got {0}")]
    InvalidBeta(f64),

    #[error("label must be -1 or +1, got {0}")]
    InvalidLabel(i64),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("sample count must be at least 1")]
    ZeroSamples,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("value {value} outside the allowed range {range}")]
    OutOfRange { value: f64, range: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("quadrature rules disagree: fixed = {fixed:e}, adaptive = {adaptive:e}")]
    QuadratureDisagreement { fixed: f64, adaptive: f64 },

    #[error("adaptive quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    QuadratureNonConvergence { estimate: f64, error: f64 },

    #[error("identity cross-check failed for {name}: {left:e} vs {right:e}")]
    IdentityMismatch {
        name: &'static str,
        left: f64,
        right: f64,
    },

    #[error("numerical range exceeded: {0}")]
    NumericalRange(String),

    #[error("memory guard: predicted {predicted} points exceeds limit {limit}")]
    MemoryGuard { predicted: f64, limit: f64 },

    #[error("unresolved sweep cell: {0}")]
    Unresolved(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
