use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("requested length must be at least 1")]
    ZeroLength,
    #[error("index {index} out of range for ground set of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("observable {observable} cannot be evaluated on a {system} orbit")]
    Incompatible {
        observable: &'static str,
        system: &'static str,
    },
    #[error("orbit too short: need {needed} states, have {available}")]
    OrbitTooShort { needed: usize, available: usize },
    #[error("sequence `{name}` too short: need {needed} values, have {available}")]
    InsufficientLength {
        name: &'static str,
        needed: usize,
        available: usize,
    },
    #[error("value {value} at index {index} of `{name}` exceeds bound {bound}")]
    BoundViolation {
        name: &'static str,
        index: usize,
        value: f64,
        bound: f64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no exact integral available: {0}")]
    NoExactIntegral(String),
    #[error("set has measure zero")]
    ZeroMeasure,
    #[error("transform size overflow for N = {0}")]
    FftSizeOverflow(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
