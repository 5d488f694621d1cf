use thiserror::Error;

/// Errors raised by the simulator and the circuit runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeqcError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violation: {0}")]
    PreconditionViolation(String),
    #[error("circuit validation failed: {0}")]
    CircuitValidation(String),
    #[error("non-Gaussian operation: {0}")]
    NonGaussian(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, FeqcError>;

pub(crate) fn invalid(msg: impl Into<String>) -> FeqcError {
    FeqcError::InvalidArgument(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> FeqcError {
    FeqcError::PreconditionViolation(msg.into())
}
