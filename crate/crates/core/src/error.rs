use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure at t = {time}: {reason}")]
    NumericalFailure { time: f64, reason: String },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("unresolved tail: |eta| = {eta} lies beyond the resolvable band {band}")]
    UnresolvedTail { eta: f64, band: f64 },

    #[error("initial data negative ({value:e}) at node x = {x}, v = {v}")]
    Negativity { x: f64, v: f64, value: f64 },

    #[error("mode amplitude blew up at t = {time} (|rho| = {value:e})")]
    Blowup { time: f64, value: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("Newton scheme diverged at level {level}: delta grew from {previous:e} to {current:e}")]
    NewtonDivergence {
        level: usize,
        previous: f64,
        current: f64,
    },

    #[error("no echo detected: {0}")]
    NoEcho(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
