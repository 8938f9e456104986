use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DiscordError {
    #[error("time series needs at least 3 values, got {0}")]
    SeriesTooShort(usize),

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("invalid subsequence length {m} for series of length {n}")]
    InvalidLength { m: usize, n: usize },

    #[error("segment length {seglen} is shorter than subsequence length {m}")]
    SegmentTooShort { seglen: usize, m: usize },

    #[error("segment length {seglen} exceeds series length {n}")]
    SegmentTooLong { seglen: usize, n: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("window of {got} elements is too short, need {need}")]
    WindowTooShort { got: usize, need: usize },

    #[error("ordinal {k} out of range 2..={seg_n}")]
    OrdinalOutOfRange { k: usize, seg_n: usize },

    #[error("k = {k} out of range 1..={max}")]
    CountOutOfRange { k: usize, max: usize },

    #[error("invalid length range minL={min_l}, maxL={max_l} for n={n}")]
    InvalidRange { min_l: usize, max_l: usize, n: usize },

    #[error("stats cannot advance past length {m} (n = {n})")]
    CannotAdvance { m: usize, n: usize },

    #[error("{}, line {line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DiscordError>;
