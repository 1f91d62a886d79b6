use std::path::PathBuf;

use thiserror::Error;

use crate::field_io::FieldIoError;

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for configuration and parameter errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for numerical-validity failures.
pub const EXIT_NUMERICAL: i32 = 3;
/// Exit code for I/O failures.
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] ferriswheel::Error),

    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    FieldFormat(#[from] FieldIoError),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_CONFIG,
            CliError::Io { .. } | CliError::FieldFormat(_) => EXIT_IO,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
