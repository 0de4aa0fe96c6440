use thiserror::Error;

/// Errors produced anywhere in the processing chain.
#[derive(Debug, Error)]
pub enum RspError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A parameter or input violated one of the documented invariants.
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("eigen-decomposition did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RspError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        RspError::Validation(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        RspError::Dimension(msg.into())
    }

    /// Whether this error stems from bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, RspError::Parse { .. } | RspError::Validation(_))
    }
}

pub type Result<T> = std::result::Result<T, RspError>;
