use std::path::PathBuf;

use copula_exo::ErrorCategory;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("cannot parse row {row}, column '{column}': {value:?}")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("missing value at row {row}, column '{column}'")]
    MissingValue { row: usize, column: String },

    #[error("column '{0}' is not in the header")]
    MissingColumn(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("invalid scenario file: {0}")]
    Scenario(String),

    #[error(transparent)]
    Core(#[from] copula_exo::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Scenario(_) => EXIT_USAGE,
            CliError::FileNotFound(_)
            | CliError::Parse { .. }
            | CliError::MissingValue { .. }
            | CliError::MissingColumn(_)
            | CliError::Malformed(_) => EXIT_DATA,
            CliError::Core(e) => match e.category() {
                ErrorCategory::Usage => EXIT_USAGE,
                ErrorCategory::Data => EXIT_DATA,
                ErrorCategory::Numerical => EXIT_NUMERICAL,
            },
        }
    }
}
