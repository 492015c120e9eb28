//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its mathematical domain (e.g. |y| > 1).
    #[error("domain error: {0}")]
    Domain(String),

    /// Dimensions of two inputs do not agree.
    #[error("shape error: {0}")]
    Shape(String),

    /// A combinatorial quantity exceeds the configured budget or the
    /// addressable size.
    #[error("size error: {0}")]
    Size(String),

    /// A documented precondition was violated.
    #[error("precondition error: {0}")]
    Precondition(String),

    /// Observed data is unusable (non-finite sample values and the like).
    #[error("data error: {0}")]
    Data(String),

    /// A numerical result cannot be trusted at the requested accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// An iterative solver failed to converge.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Malformed user input (CLI arguments, config or data files).
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
