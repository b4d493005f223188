use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation, or the
    /// requested quantity diverges.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive integration did not reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    Quadrature(String),

    /// The operation is only implemented for some dimensions.
    #[error("unsupported dimension n = {0}")]
    UnsupportedDimension(u32),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
