use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("decomposition failure: {0}")]
    DecompositionFailure(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid moments: {0}")]
    InvalidMoments(String),

    #[error("fit did not converge after {iterations} iterations (best residual {residual:.3e})")]
    FitFailure { iterations: usize, residual: f64, history: Vec<f64> },

    #[error("outside the validated domain: {0}")]
    Domain(String),

    #[error("equivalence check failed: max relative deviation {deviation:.3e} at moment {order}")]
    EquivalenceFailure { deviation: f64, order: usize },

    #[error("linear algebra backend failure: {0}")]
    Backend(String),
}

pub type Result<T> = std::result::Result<T, Error>;
