use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("contact solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("point outside the fisheye field of view (incidence {incidence:.4} rad > {max:.4} rad)")]
    OutOfField { incidence: f64, max: f64 },

    #[error("calibration invalid: {0}")]
    CalibrationInvalid(String),

    #[error("translation refinement failed: {0}")]
    RefinementFailed(String),

    #[error("node {index} at ({x:.4}, {y:.4}) mm lies outside the sensing surface")]
    NodeOutsideSurface { index: usize, x: f64, y: f64 },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("integrity error in {path}: {reason}")]
    Integrity { path: PathBuf, reason: String },

    #[error("dataset version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("augmentation not applicable: {0}")]
    Augmentation(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("image error: {0}")]
    Image(String),

    #[error("simulation aborted at trajectory {trajectory}, step {step}: {source}")]
    Simulation {
        trajectory: usize,
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    /// True for errors caused by bad inputs rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Parse { .. }
                | Error::CalibrationInvalid(_)
                | Error::VersionMismatch { .. }
                | Error::ShapeMismatch(_)
                | Error::LengthMismatch(_)
        )
    }
}
