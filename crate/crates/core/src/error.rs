//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("eigendecomposition did not converge for {dim}x{dim} matrix")]
    EighNoConvergence { dim: usize },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.6e} below -{tol:.6e}")]
    NotPsd { eigenvalue: f64, tol: f64 },

    #[error("matrix is numerically singular: condition number estimate {condition:.3e}")]
    NearSingular { condition: f64 },

    #[error("diagonal entry {index} is not positive: {value}")]
    NonPositiveDiagonal { index: usize, value: f64 },

    #[error("model {model} realized a non-PSD covariance: min eigenvalue {min_eigenvalue:.6e}")]
    ModelNotPsd { model: String, min_eigenvalue: f64 },

    #[error("signal support m={m} exceeds dimension p={p}")]
    SignalSupportTooLarge { m: usize, p: usize },

    #[error("signal kind {signal} does not apply to a {problem} problem")]
    SignalKindMismatch { signal: String, problem: String },

    #[error("need at least {min} observations, got {n}")]
    TooFewObservations { n: usize, min: usize },

    #[error("dimension must be at least {min}, got {p}")]
    DimensionTooSmall { p: usize, min: usize },

    #[error("sample variance of column {index} is not positive")]
    ZeroVariance { index: usize },

    #[error("degenerate variance estimate: 2 tr(R^2) - p^2/(n-1) = {value:.6e} <= 0")]
    DegenerateTraceEstimate { value: f64 },

    #[error("degenerate two-sample variance estimate: sigma^2 = {value:.6e} <= 0")]
    DegenerateSigma { value: f64 },

    #[error("p-value {value} outside [0, 1]")]
    InvalidPValue { value: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("threshold grid is empty")]
    EmptyGrid,

    #[error("threshold grid value {value} outside (0, 1)")]
    InvalidGridValue { value: f64 },

    #[error("quadratic-form variance sigma_A^2 = {value:.6e} is not positive")]
    NonPositiveQfVariance { value: f64 },

    #[error("oracle precision requested but no oracle matrix supplied")]
    MissingOracle,

    #[error("invalid configuration: {field}: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteData { row: usize, col: usize },
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
