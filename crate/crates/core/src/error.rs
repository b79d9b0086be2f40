//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no records in input")]
    NoRecords,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid header: {0}")]
    InvalidHeader(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("component {component} has zero variance; cannot z-score")]
    ZeroVariance { component: char },

    #[error("series shorter than one segment: length {len} < segment length {segment_len}")]
    SeriesTooShort { len: usize, segment_len: usize },

    #[error("lag {lag} out of range for segment length {segment_len}")]
    LagOutOfRange { lag: usize, segment_len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("matrix not symmetric: residual {residual:e}")]
    NotSymmetric { residual: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("pair overlap between particles {i} and {j}: r = {r:e}")]
    PairOverlap { i: usize, j: usize, r: f64 },

    #[error("integration blow-up at step {step}: non-finite coordinate")]
    IntegrationBlowUp { step: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            location: format!("line {line}"),
            message: message.into(),
        }
    }
}
