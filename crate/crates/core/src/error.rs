use std::path::PathBuf;

use crate::corpus::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate message id {0:?}")]
    DuplicateId(String),
    #[error("insufficient {class} messages: requested {requested}, only {available} usable")]
    InsufficientData {
        class: Label,
        requested: usize,
        available: usize,
    },
    #[error("targeted message {0:?} not found in stream")]
    TargetNotFound(String),
    #[error("spectral computation failed: {0}")]
    Spectral(String),
    #[error("undefined measure {0:?}")]
    UndefinedMeasure(String),
    #[error("vocabulary is empty after min_count filtering")]
    EmptyVocabulary,
    #[error("connectivity matrix is all zero")]
    DegenerateMatrix,
    #[error("dataset too small: class {class} has {count} items, need at least {min}")]
    DatasetTooSmall { class: Label, count: usize, min: usize },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("training data contains a single class")]
    SingleClassTraining,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("identity mismatch: {left:?} vs {right:?}")]
    IdentityMismatch { left: String, right: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse classification used by the command line to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) => ErrorKind::Usage,
            Error::Spectral(_)
            | Error::EmptyVocabulary
            | Error::DegenerateMatrix
            | Error::NonFiniteFeature { .. }
            | Error::Protocol(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }
}
