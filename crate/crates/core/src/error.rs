use thiserror::Error;

use crate::integrator::Termination;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("{context}: integration stopped at t = {at} ({termination:?})")]
    Integration {
        context: String,
        at: f64,
        termination: Termination,
    },

    #[error("value {value} outside the covered range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("search failed: {0}")]
    Search(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("export failed: {0}")]
    Export(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
