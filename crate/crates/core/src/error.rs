use std::path::PathBuf;

use thiserror::Error;

use crate::dataset::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification of an [`Error`], used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad arguments or parameters supplied by the caller.
    Usage,
    /// Malformed or inconsistent input data.
    Data,
    /// A violated internal invariant.
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("label column {0:?} not found in header")]
    MissingLabelColumn(String),

    #[error("label column {0:?} appears more than once in header")]
    DuplicateLabelColumn(String),

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a finite real")]
    ParseCell { row: usize, column: String, value: String },

    #[error("row {row}: unknown label value {value:?}")]
    UnknownLabel { row: usize, value: String },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("class empty: {0}")]
    EmptyClass(Label),

    #[error("non-finite value at feature {feature}, sample {sample}")]
    NonFinite { feature: usize, sample: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("k = {k} is out of range for {m} features (expected 0 <= k <= {m})")]
    KOutOfRange { k: usize, m: usize },

    #[error("{m} features exceed the enumeration limit of {limit}")]
    EnumerationLimit { m: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model json: {0}")]
    ModelJson(#[from] serde_json::Error),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::KOutOfRange { .. } | Error::EnumerationLimit { .. } | Error::InvalidArgument(_) => {
                ErrorCategory::Usage
            }
            Error::Consistency(_) => ErrorCategory::Internal,
            _ => ErrorCategory::Data,
        }
    }
}
