//! Error type shared by every module.

use thiserror::Error;

/// Failures raised by the numerical and algebraic routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A series or product needed more terms than the configured cap.
    #[error("truncation cap of {cap} terms reached in {what}")]
    TruncationCap { what: &'static str, cap: usize },
    /// An iterative method failed to reach the requested accuracy.
    #[error("no convergence in {what}: {detail}")]
    NoConvergence { what: &'static str, detail: String },
    /// Two independent computations that must agree did not.
    #[error("inconsistent results in {what}: {detail}")]
    Inconsistent { what: &'static str, detail: String },
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
