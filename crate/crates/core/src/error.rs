use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in column {column} (row {row})")]
    NonFinite { row: usize, column: usize },

    #[error("need at least {required} rows, got {actual}")]
    TooFewRows { required: usize, actual: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("treatment vector must contain both classes (treated = {treated}, control = {control})")]
    SingleClass { treated: usize, control: usize },

    #[error("treatment value at row {row} is {value}; expected 0 or 1")]
    NonBinaryTreatment { row: usize, value: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cross-validation fold {fold} has no {missing} units in its training set")]
    FoldClassMissing { fold: usize, missing: &'static str },

    #[error("no matched pairs: treated and control propensity scores do not overlap")]
    NoOverlap,

    #[error("unknown scenario label {0:?} (expected 1A, 1B, 2A or 2B)")]
    UnknownScenario(String),

    #[error("missing value at row {row}, column {column:?}")]
    MissingValue { row: usize, column: String },

    #[error("cannot parse {value:?} at row {row}, column {column:?} as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("column {0:?} not found in header")]
    MissingColumn(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable identifier, used by the CLI's one-line error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "non_finite",
            Error::TooFewRows { .. } => "too_few_rows",
            Error::Dimension(_) => "dimension",
            Error::SingleClass { .. } => "single_class",
            Error::NonBinaryTreatment { .. } => "non_binary_treatment",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::FoldClassMissing { .. } => "fold_class_missing",
            Error::NoOverlap => "no_overlap",
            Error::UnknownScenario(_) => "unknown_scenario",
            Error::MissingValue { .. } => "missing_value",
            Error::Parse { .. } => "parse",
            Error::MissingColumn(_) => "missing_column",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
