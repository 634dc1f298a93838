use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate index {index} out of range for {len} coordinates")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("malformed seed: {0}")]
    MalformedSeed(String),

    #[error("insufficient seed bits: need {needed}, have {available}")]
    InsufficientSeedBits { needed: u64, available: u64 },

    #[error("seed space of {size} seeds is too large for exhaustive enumeration (limit {limit})")]
    SeedSpaceTooLarge { size: u128, limit: u128 },

    #[error("analytic baseline requires a degree-1 threshold function, got degree {0}")]
    AnalyticBaseline(u32),

    #[error("least-squares fit matrix is singular")]
    SingularFit,

    #[error("hermite degree {0} exceeds the exact conversion tables")]
    DegreeTooLarge(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
