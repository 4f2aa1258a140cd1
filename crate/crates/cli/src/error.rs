use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Exit code for invalid arguments or configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for filesystem failures.
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{field}: {source}")]
    Field {
        field: String,
        source: lz78_source::Error,
    },

    #[error(transparent)]
    Core(#[from] lz78_source::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(lz78_source::Error::Io(_)) => EXIT_IO,
            CliError::Field { source: lz78_source::Error::Io(_), .. } => EXIT_IO,
            _ => EXIT_CONFIG,
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches the name of the offending field to a library error.
pub trait FieldContext<T> {
    fn field(self, name: &str) -> CliResult<T>;
}

impl<T> FieldContext<T> for lz78_source::Result<T> {
    fn field(self, name: &str) -> CliResult<T> {
        self.map_err(|source| CliError::Field {
            field: name.to_string(),
            source,
        })
    }
}
