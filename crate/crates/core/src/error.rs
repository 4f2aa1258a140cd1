use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("symbol {symbol} out of range for alphabet size {alphabet_size}")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },

    #[error("alphabet size mismatch: expected {expected}, got {actual}")]
    AlphabetMismatch { expected: usize, actual: usize },

    #[error("order {order} exceeds the cap of {cap}")]
    OrderTooLarge { order: usize, cap: usize },

    #[error("checkpoint {checkpoint} is too small (needs at least {min})")]
    CheckpointTooSmall { checkpoint: u64, min: u64 },

    #[error("checkpoint {checkpoint} exceeds sequence length {len}")]
    CheckpointBeyondEnd { checkpoint: u64, len: u64 },

    #[error("statistic requires the per-step parameter trace, which was not recorded")]
    MissingBTrace,

    #[error("predictive requested at a state of probability zero")]
    ZeroProbabilityState,

    #[error("invalid markov law: {0}")]
    InvalidMarkovLaw(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
