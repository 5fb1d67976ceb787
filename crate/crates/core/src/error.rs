use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violates the operation's domain (shape, range, norm).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative method failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A resolvent or inverse was requested too close to a pole.
    #[error("singular: {0}")]
    Singular(String),

    /// Power iteration produced a zero update vector.
    #[error("degenerate iterate at step {step}: update vector has zero norm")]
    DegenerateIterate { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
