use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {name} {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("reaction term is not declared nonincreasing in u: {0}")]
    NonMonotoneReaction(String),
    #[error("solver failed{}: {reason}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    SolverFailure { step: Option<usize>, reason: String },
    #[error("time step refused: {0}")]
    StepRefused(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
