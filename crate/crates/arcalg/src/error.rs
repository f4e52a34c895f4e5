use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A size bound (number of points, enumeration size) was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A rewriting computation ran out of basic reductions.
    #[error("fuel exhausted after {0} basic reductions")]
    FuelExhausted(u64),
    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An internal cross-check failed; the message names the witness.
    #[error("certification failure: {0}")]
    Certification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
