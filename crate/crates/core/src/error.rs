use thiserror::Error;

/// Errors raised by the landscape library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is singular to working precision (pivot {pivot}, |pivot| = {magnitude:e})")]
    Singular { pivot: usize, magnitude: f64 },

    #[error("operator `{0}` is not Hermitian")]
    NotHermitian(String),

    #[error("operator `{0}` has complex entries; this operation needs a real operator")]
    ComplexOperator(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("magnetic signature does not match graph: {0}")]
    SignatureMismatch(String),

    #[error("weight vector must be strictly positive (index {index}, value {value})")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty parameter grid: {0}")]
    EmptyGrid(&'static str),

    #[error("no admissible parameter: {0}")]
    NoAdmissible(String),

    #[error("degenerate ground eigenvalue (spectral gap {gap:e})")]
    DegenerateGround { gap: f64 },

    #[error("ground state is not sign-definite (min {min:e}, max {max:e})")]
    IndefiniteGround { min: f64, max: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { what: &'static str, iterations: usize, residual: f64 },

    #[error("non-finite value produced by {0}")]
    NonFinite(String),

    #[error("graph JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
