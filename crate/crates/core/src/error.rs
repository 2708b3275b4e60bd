use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure classes, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {actual}")]
    Dimension {
        op: &'static str,
        expected: String,
        actual: String,
    },

    #[error("matrix contains a non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("data length {len} does not match shape {rows}x{cols}")]
    DataLength { rows: usize, cols: usize, len: usize },

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    SvdFailure { rows: usize, cols: usize },

    #[error("layer {layer}: pseudoinverse is degenerate (no singular value above cutoff {tolerance:e})")]
    RankDeficient { layer: usize, tolerance: f64 },

    #[error("layer {layer}: non-finite value produced during {stage}")]
    NumericalFailure { layer: usize, stage: &'static str },

    #[error("gradient descent diverged at iteration {iteration} (loss {loss})")]
    Diverged { iteration: usize, loss: f64 },

    #[error("label {label} is out of range for {classes} classes")]
    Encoding { label: usize, classes: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file is empty")]
    EmptyFile { path: PathBuf },

    #[error("{path}: row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: row {row}, column {col}: cannot parse {value:?} as a number")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        col: usize,
        value: String,
    },

    #[error("{path}: row {row}, column {col}: missing value")]
    MissingValue { path: PathBuf, row: usize, col: usize },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("malformed weight file: {0}")]
    WeightFile(String),

    #[error("classification needs at least two classes, found {found}")]
    TooFewClasses { found: usize },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::Dimension { .. } | Error::Encoding { .. } => {
                ErrorCategory::Config
            }
            Error::Io { .. }
            | Error::EmptyFile { .. }
            | Error::RaggedRow { .. }
            | Error::NonNumeric { .. }
            | Error::MissingValue { .. }
            | Error::Csv { .. }
            | Error::WeightFile(_)
            | Error::TooFewClasses { .. }
            | Error::EmptyMatrix { .. }
            | Error::DataLength { .. } => ErrorCategory::Data,
            Error::NonFinite { .. }
            | Error::SvdFailure { .. }
            | Error::RankDeficient { .. }
            | Error::NumericalFailure { .. }
            | Error::Diverged { .. } => ErrorCategory::Numerical,
        }
    }

    pub(crate) fn dimension(
        op: &'static str,
        expected: impl Into<String>,
        actual: impl Into<String>,
    ) -> Self {
        Error::Dimension {
            op,
            expected: expected.into(),
            actual: actual.into(),
        }
    }
}
