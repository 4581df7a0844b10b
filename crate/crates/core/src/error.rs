use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("moment data has non-positive variance ({variance})")]
    DegenerateVariance { variance: f64 },

    #[error("tail sequence increases at index {index} ({prev} < {next})")]
    NotMonotone { index: usize, prev: f64, next: f64 },

    #[error("polynomial coefficients or exponents are not sorted: {0}")]
    InvariantViolation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no feasible distribution found: {0}")]
    Infeasible(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
