//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by field construction, harmonic-analysis routines and the
/// experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The characteristic is 2 or not prime.
    #[error("NotOddPrime: {0} is not an odd prime")]
    NotOddPrime(u64),
    /// A field or grid is larger than the configured cap.
    #[error("CapExceeded: {what} = {size} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u64,
    },
    /// Extension degree 0.
    #[error("invalid extension degree {0}")]
    InvalidDegree(u32),
    /// Dimension below 2.
    #[error("invalid dimension {0}: need d >= 2")]
    InvalidDimension(usize),
    /// Inverse of zero requested.
    #[error("DivisionByZero")]
    DivisionByZero,
    /// Direct Gauss sum disagrees with its closed form.
    #[error("ClosedFormMismatch: {what}: direct {direct} vs closed {closed}")]
    ClosedFormMismatch {
        what: &'static str,
        direct: String,
        closed: String,
    },
    /// Operation needs an odd dimension.
    #[error("EvenDimension: operation requires odd d, got d = {0}")]
    EvenDimension(usize),
    /// Operation needs an even dimension.
    #[error("OddDimension: operation requires even d, got d = {0}")]
    OddDimension(usize),
    /// Operation-specific precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A point set or file contained no points.
    #[error("EmptySet: point set is empty")]
    EmptySet,
    /// Set is too small for the cited distance-set corollary.
    #[error("BelowThreshold: |E| = {size} is not above {threshold:.4}")]
    BelowThreshold { size: usize, threshold: f64 },
    /// Element or point index outside its range.
    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: u64, limit: u64 },
    /// Point-set text could not be parsed.
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    /// Requested sample is larger than the space.
    #[error("infeasible: requested {requested} points but the space has {available}")]
    Infeasible { requested: usize, available: usize },
    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),
    /// I/O failure (message only, to keep the type cloneable).
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
