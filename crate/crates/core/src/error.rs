use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of the operation (negative radicand, zero
    /// denominator, excluded parameter value).
    #[error("domain error: {0}")]
    Domain(String),

    /// A generated quantity vanished; names the polynomial factor that is zero.
    #[error("degenerate: {factor} = 0")]
    Degenerate { factor: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Exact arithmetic disagreed with itself. Never expected; aborts a search.
    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
