//! Error type shared across the crate.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument is outside the documented domain (negative time,
    /// step size too large, ...).
    Domain(String),
    /// The requested (generator, dimension, ...) combination is not
    /// supported by any implemented path.
    Capability(String),
    /// Input data failed validation (asymmetric covariance, unnormalized
    /// density, singular matrix, too few samples, ...).
    Input(String),
    /// A chain produced a nonfinite state; carries the offending point.
    ChainFailure { message: String, state: Vec<f64> },
    /// An inner optimization (RGO mode finding) did not converge.
    Optimization(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Capability(m) => write!(f, "unsupported: {m}"),
            Error::Input(m) => write!(f, "invalid input: {m}"),
            Error::ChainFailure { message, state } => {
                write!(f, "chain failure: {message} at state {state:?}")
            }
            Error::Optimization(m) => write!(f, "optimization failed: {m}"),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    pub(crate) fn domain(m: impl Into<String>) -> Self {
        Error::Domain(m.into())
    }
    pub(crate) fn capability(m: impl Into<String>) -> Self {
        Error::Capability(m.into())
    }
    pub(crate) fn input(m: impl Into<String>) -> Self {
        Error::Input(m.into())
    }
}
