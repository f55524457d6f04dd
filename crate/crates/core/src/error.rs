use std::path::PathBuf;

use thiserror::Error;

use crate::grid::{Axis, Compartment};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("slice system along {axis} (slice {slice}) is singular")]
    SingularSystem { axis: Axis, slice: usize },

    #[error("compartment {compartment}: {source}")]
    InCompartment {
        compartment: Compartment,
        #[source]
        source: Box<Error>,
    },

    #[error("solver failed at step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("explicit integration became unstable at t = {time} (|u| = {magnitude:e})")]
    Unstable { time: f64, magnitude: f64 },

    #[error("dense oracle limited to {limit} unknowns, grid has {unknowns}")]
    SizeGuard { unknowns: usize, limit: usize },

    #[error("{path}:{line}: {message}")]
    Config { path: String, line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn mismatch(expected: impl Into<String>, actual: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            expected: expected.into(),
            actual: actual.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical scheme itself, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::SingularSystem { .. } | Error::Unstable { .. } => true,
            Error::Step { source, .. } | Error::InCompartment { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }

    pub(crate) fn in_compartment(self, compartment: Compartment) -> Self {
        Error::InCompartment {
            compartment,
            source: Box::new(self),
        }
    }
}
