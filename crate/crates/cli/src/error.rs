use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lgq_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("missing required value `{0}`")]
    Missing(&'static str),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Parse(String),
    #[error("invalid configuration at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed CSV: {0}")]
    CsvFormat(String),
    #[error("oracle and closed form disagree by {worst:e} (limit {limit:e})")]
    VerifyFailed { worst: f64, limit: f64 },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Usage(_) => "USAGE",
            CliError::Missing(_) => "MISSING_VALUE",
            CliError::Io { .. } => "IO_ERROR",
            CliError::Parse(_) => "PARSE_ERROR",
            CliError::Schema { .. } => "SCHEMA_ERROR",
            CliError::Csv(_) | CliError::CsvFormat(_) => "CSV_ERROR",
            CliError::VerifyFailed { .. } => "VERIFY_FAILED",
        }
    }

    /// 1 for bad input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::VerifyFailed { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
