use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector norm {norm:e} is too small to normalize")]
    ZeroVector { norm: f64 },

    #[error("vector norm {norm} is not 1")]
    NotUnit { norm: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vector has {0} dimensions, at least 2 required")]
    DimensionTooSmall(usize),

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("{name} = {value} outside of {range}")]
    MarginOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("similarity {name} = {value} outside of [-1, 1]")]
    SimilarityOutOfRange { name: &'static str, value: f64 },

    #[error("stored delta {stored} disagrees with phi_ap - phi_an = {expected}")]
    InconsistentDelta { stored: f64, expected: f64 },

    #[error("empty batch")]
    EmptyBatch,

    #[error("empty input")]
    EmptyInput,

    #[error("batch contains no valid triplets")]
    NoTriplets,

    #[error("query has no relevant gallery item")]
    NoRelevantItems,

    #[error("batch size {batch_size} is not a positive multiple of per_subject {per_subject}")]
    BatchShape { batch_size: usize, per_subject: usize },

    #[error("need {needed} subjects per batch, dataset has {available}")]
    InsufficientSubjects { needed: usize, available: usize },

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid config: {field}: {reason}")]
    ConfigInvalid { field: &'static str, reason: String },

    #[error("finite-difference step {0:e} outside [1e-8, 1e-3]")]
    StepOutOfRange(f64),

    #[error("csv: {0}")]
    Csv(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
