//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter combination the numerical routines do not support
    /// (e.g. integer second parameter of the Tricomi function).
    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    /// A result too large to represent in double precision.
    #[error("saturation: {0}")]
    Saturation(String),

    /// An iterative scheme failed to reach its tolerance.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
