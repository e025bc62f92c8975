use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for a system on {n} points")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),

    #[error("{op} is not defined for {system} with a {set} set")]
    Incompatible {
        op: &'static str,
        system: &'static str,
        set: &'static str,
    },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("interval union exceeds capacity of {0} intervals")]
    CapacityExceeded(usize),

    #[error("no return to the set within {cap} steps")]
    CapExceeded { cap: u64 },

    #[error("rejection sampling found no point of the set in {0} draws")]
    SamplingFailed(u64),

    #[error("orbit length {got} is too short, need at least {need}")]
    InsufficientOrbit { got: u64, need: u64 },

    #[error("degenerate observable: zero autocorrelation at lag 0")]
    DegenerateObservable,

    #[error("observable cannot be evaluated here: {0}")]
    ObservableMismatch(String),

    #[error("actions do not commute at point {0}")]
    NonCommuting(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
