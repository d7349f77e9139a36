use thiserror::Error;

/// Errors raised by the persuasion toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("size cap exceeded: {what} needs {needed}, cap is {cap}")]
    SizeCap {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("dual certificate infeasible at {location}: violation {violation:e}")]
    InfeasibleDual { location: String, violation: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
