use thiserror::Error;

/// Errors raised by the tension library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("enumeration of {size:.3e} channels exceeds the budget of {budget:.3e}")]
    BudgetExceeded { size: f64, budget: f64 },

    #[error("region has no inner points")]
    EmptyRegion,

    /// The request cannot be answered soundly with the evidence at hand.
    #[error("refused: {0}")]
    Refused(String),

    /// A shipped fact disagrees with its exact recomputation.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
