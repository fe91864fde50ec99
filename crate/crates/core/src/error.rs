use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed EDF header: {0}")]
    EdfHeader(String),

    #[error(
        "EDF signals use different sample rates ({0} Hz vs {1} Hz); resampling is not supported"
    )]
    EdfRateMismatch(f64, f64),

    #[error("truncated EDF data: expected {expected} bytes of samples, found {found}")]
    EdfTruncated { expected: usize, found: usize },

    #[error("{path}: row {row}, column {column}: cannot parse {value:?} as a number")]
    CsvCell {
        path: String,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("{path}: row {row} has {found} columns, expected {expected}")]
    CsvColumns {
        path: String,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("invalid annotation interval [{start}, {end})")]
    InvalidInterval { start: f64, end: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("unknown patient {0:?}")]
    UnknownPatient(String),

    #[error("model container: {0}")]
    Container(String),

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
