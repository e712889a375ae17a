use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid privacy level {0}: must be positive and finite")]
    InvalidLevel(f64),

    #[error("privacy levels out of order: {lower} must not exceed {upper}")]
    Ordering { lower: f64, upper: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// A query strictly between two stored levels; no conditional law exists
    /// for sampling given both neighbours.
    #[error("level {requested} lies strictly between stored levels {lower} and {upper}")]
    BridgeUnsupported {
        requested: f64,
        lower: f64,
        upper: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("too few samples: got {got}, need at least {min}")]
    TooFewSamples { got: usize, min: usize },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
