use thiserror::Error;

use crate::spectral::TrajectoryRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters, mismatched inputs or a schema violation.
    #[error("configuration error: {0}")]
    Config(String),

    /// A Fourier multiplier returned NaN or an infinity at a grid frequency.
    #[error("multiplier is not finite at xi = {xi}")]
    NonFiniteMultiplier { xi: f64 },

    /// An argument lies outside the set where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The time integrator produced a NaN or an overflowing coefficient.
    ///
    /// `partial` holds every snapshot recorded up to `last_valid_time`.
    #[error("blow-up detected after t = {last_valid_time}")]
    BlowUp {
        last_valid_time: f64,
        partial: Box<TrajectoryRecord>,
    },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
