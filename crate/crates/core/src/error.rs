use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by construction, verification and flow routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Input failed a precondition (bad dimensions, non-unit vector, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A structural relation that should hold exactly (up to tolerance) was
    /// violated; carries the offending residual.
    #[error("{context}: relation violated, residual {residual:.3e}")]
    Relation { context: String, residual: f64 },

    /// An iterative routine failed to converge.
    #[error("{context}: did not converge ({detail})")]
    Convergence { context: String, detail: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn relation(context: impl Into<String>, residual: f64) -> Self {
        Error::Relation {
            context: context.into(),
            residual,
        }
    }

    pub fn convergence(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Convergence {
            context: context.into(),
            detail: detail.into(),
        }
    }
}
