use thiserror::Error;

/// Errors raised by the arithmetic engines and the verification suites.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Operands are incompatible (different primes, levels, fields or shapes).
    #[error("usage error: {0}")]
    Usage(String),
    /// The truncation order is too small to decide the requested quantity.
    #[error("precision error: {0}")]
    Precision(String),
    /// A series or ring element could not be inverted.
    #[error("inversion error: {0}")]
    Inversion(String),
    /// Root extraction outside the supported monomial case.
    #[error("unsupported root: {0}")]
    UnsupportedRoot(String),
    /// A norm query falls outside the range where the tail bound is valid.
    #[error("range error: {0}")]
    Range(String),
    /// An identity that holds by construction failed; always a bug.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
