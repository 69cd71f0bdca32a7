use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid window specification: {0}")]
    InvalidWindow(String),

    #[error("window index {index} out of range: window [{start}, {end}) exceeds series length {len}")]
    WindowOutOfRange {
        index: usize,
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("subsequence too short: length {0}, need at least 2")]
    TooShort(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid simulation config: {0}")]
    InvalidSimConfig(String),

    #[error("no coordination events detected")]
    NoCoordination,

    #[error("classifier input: {0}")]
    Classifier(String),

    #[error("ragged series: entity `{entity}` has no observation at time {time}")]
    RaggedSeries { entity: String, time: String },

    #[error("duplicate observation for entity `{entity}` at time {time}")]
    DuplicateKey { entity: String, time: String },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse failure class, used by the command line front end to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Ingestion,
    Config,
    NoCoordination,
    Internal,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidDataset(_)
            | Error::RaggedSeries { .. }
            | Error::DuplicateKey { .. }
            | Error::Parse { .. }
            | Error::Csv(_) => ErrorClass::Ingestion,
            Error::Io { .. } => ErrorClass::Ingestion,
            Error::InvalidWindow(_)
            | Error::InvalidParameter(_)
            | Error::InvalidSimConfig(_)
            | Error::Config(_)
            | Error::Classifier(_) => ErrorClass::Config,
            Error::NoCoordination => ErrorClass::NoCoordination,
            Error::WindowOutOfRange { .. }
            | Error::LengthMismatch { .. }
            | Error::TooShort(_)
            | Error::Json(_) => ErrorClass::Internal,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
