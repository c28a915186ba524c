use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A term would need more bits than the configured cap allows.
    #[error("term n_{k} needs {bits} bits, above the cap of {cap} bits (use a reduced tower or the symbolic path)")]
    TowerOverflow { k: u64, bits: u128, cap: u64 },

    #[error("sequence is not strictly increasing at index {index}")]
    NotIncreasing { index: usize },

    #[error("{pairs} index pairs exceed the pair budget of {budget}")]
    PairBudgetExceeded { pairs: u128, budget: u128 },

    #[error("invalid case: {0}")]
    InvalidCase(String),

    #[error("window weights are degenerate (a = 0): every s value vanishes")]
    DegenerateWeights,

    #[error("weights are not normalized: sum of squares is {0}")]
    WeightsNotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index overflow: {0}")]
    IndexOverflow(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
