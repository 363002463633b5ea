use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("band count {found} not supported: {reason}")]
    BandCount { found: usize, reason: String },

    /// A statistic needed by the operation is undefined for the input
    /// (constant raster where a correlation is required, zero mean, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    #[error("sample {value} out of range for {depth}-bit output")]
    OutOfRange { value: f64, depth: u32 },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("failed to decode {path}: {reason}")]
    Decode { path: PathBuf, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that stem from files or configuration rather than from
    /// the numerical content of the inputs.
    pub fn is_io_or_config(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Decode { .. } | Error::Config(_) | Error::UnsupportedFormat(_))
    }
}
