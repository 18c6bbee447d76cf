use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_BOUND_VIOLATION: i32 = 4;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{file}: field `{field}`: {message}")]
    Config {
        file: String,
        field: String,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] dnet_core::Error),
    #[error("bound violation: {0}")]
    BoundViolation(String),
    #[error("{0}")]
    Output(String),
}

impl HarnessError {
    pub fn config(file: impl Into<String>, field: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config {
            file: file.into(),
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(dnet_core::Error::ResourceLimit(_)) => EXIT_RESOURCE,
            HarnessError::BoundViolation(_) => EXIT_BOUND_VIOLATION,
            _ => EXIT_VALIDATION,
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
