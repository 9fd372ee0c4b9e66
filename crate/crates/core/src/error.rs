use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole at {0}")]
    Pole(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("shifts too close: {0}")]
    Degenerate(String),
    #[error("truncation error {estimate:e} exceeds tolerance {tol:e}")]
    Truncation { estimate: f64, tol: f64 },
    #[error("cancellation: {0}")]
    Cancellation(String),
    #[error("ill-conditioned system (condition number {0:e})")]
    IllConditioned(f64),
    #[error("quadrature tail contributes {tail:e}, above tolerance {tol:e}")]
    TailDominance { tail: f64, tol: f64 },
    #[error("problem too large: {0}")]
    TooLarge(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
