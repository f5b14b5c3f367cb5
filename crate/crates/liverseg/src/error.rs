//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

use crate::pipeline::PartialStages;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The PGM header could not be parsed (bad magic, non-numeric or
    /// missing fields, zero dimensions).
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),

    /// The raster holds fewer samples than the header declares.
    #[error("truncated PGM data: expected {expected} raster bytes, found {found}")]
    TruncatedData { expected: usize, found: usize },

    /// The declared maxval is 0 or exceeds the two-byte sample limit.
    #[error("unsupported PGM maxval {0} (must be in 1..=65535)")]
    UnsupportedMaxval(u64),

    /// Threshold interval with a lower bound above the upper bound.
    #[error("s1 must be \u{2264} s2 (got s1={s1}, s2={s2})")]
    InvalidBand { s1: u8, s2: u8 },

    /// Phantom dimensions below the supported minimum.
    #[error("phantom too small: {width}x{height} (both sides must be \u{2265} {min})")]
    TooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    /// Median window outside {3, 5, 7, 9}.
    #[error("invalid median window {0} (must be one of 3, 5, 7, 9)")]
    InvalidWindow(usize),

    /// A mask with no foreground pixels where at least one component is
    /// required.
    #[error("mask has no foreground pixels")]
    NoForeground,

    /// The pipeline found no acceptable liver candidate. Carries the
    /// stages computed before the failure so callers can dump them for
    /// diagnosis.
    #[error("liver not found: {reason}")]
    LiverNotFound {
        reason: String,
        partial: Box<PartialStages>,
    },

    /// Two rasters that must share dimensions do not.
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    /// Threshold calibration invoked with no samples.
    #[error("empty sample set: calibration needs at least one (image, truth) pair")]
    EmptySampleSet,

    /// Corpus evaluation invoked with no pairs.
    #[error("empty corpus: no image/truth pairs found")]
    EmptyCorpus,

    /// A parameter outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Filesystem failure while reading inputs or writing results.
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
