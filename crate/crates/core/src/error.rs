use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported grid: {0}")]
    UnsupportedGrid(String),

    #[error("unsupported Bessel order {0} (only 0 and 1 are available)")]
    UnsupportedOrder(u32),

    #[error("spin wave and kernel are sampled on different grids")]
    IncompatibleGrids,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("time grid too coarse: step {step:e} s exceeds {limit:e} s")]
    Resolution { step: f64, limit: f64 },

    #[error("integrator failure at t = {time}: {reason}")]
    Integrator { time: f64, reason: String },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
