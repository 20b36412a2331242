//! Shared error type.
//!
//! Variants distinguish the failure classes callers are expected to branch
//! on: bad caller input, violated object invariants, bad experiment
//! configuration, loss of numerical consistency, and gates a pass cannot
//! handle.

/// Error for all fallible operations in this crate.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Malformed direct input (dimension mismatch, bad bitstring, ...).
    #[error("input error: {0}")]
    Input(String),

    /// An object failed its declared invariants (non-unitary matrix,
    /// non-trace-preserving Kraus set, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Inconsistent or incomplete experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerically computed quantity violated a consistency bound
    /// (e.g. a residual imaginary part above tolerance).
    #[error("numerical consistency error: {0}")]
    Numerical(String),

    /// A gate label a transform or model does not support.
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
