use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Model or system parameters violate a construction invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The request is well-formed but not supported by this implementation.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// A precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
