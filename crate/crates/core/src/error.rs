use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("basis mismatch: expected {expected}, found {found}")]
    BasisMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("integration failed at t = {achieved_time:.6e} of {target_time:.6e}: {reason}")]
    IntegrationFailure {
        achieved_time: f64,
        target_time: f64,
        reason: String,
    },

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("trajectory {trajectory} lost normalization (drift {drift:.3e})")]
    TrajectoryIntegrity { trajectory: usize, drift: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
