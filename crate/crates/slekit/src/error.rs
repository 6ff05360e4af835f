//! Crate-wide error type.

/// Errors reported by the toolkit.
///
/// Numerical routines fail loudly rather than returning silently degraded
/// results: parameter-domain violations and mid-computation breakdowns carry
/// enough context (offending value, step index) to reproduce the failure.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside the domain of the requested operation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A computation broke down numerically (branch violation, divergence).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
