use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("PMI {0} is outside the 2-port single-layer codebook (0..=3)")]
    InvalidPmi(u8),
    #[error("MCS index {0} is outside table 5.1.3.1-1 (0..=28)")]
    InvalidMcs(u8),
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
