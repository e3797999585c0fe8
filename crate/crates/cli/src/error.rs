use std::path::PathBuf;

use cbx::CbxError;
use thiserror::Error;

/// Exit code for configuration and usage errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for file system errors.
pub const EXIT_IO: i32 = 3;
/// Exit code for numerical failures during a run.
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Run(CbxError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Run(e) if e.is_config() => EXIT_CONFIG,
            CliError::Run(_) => EXIT_NUMERICAL,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CbxError> for CliError {
    fn from(e: CbxError) -> Self {
        CliError::Run(e)
    }
}

/// A rejected configuration document.
#[derive(Debug, Error, PartialEq)]
#[error("config error{}: `{key}`: {reason}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
pub struct ConfigError {
    /// Dotted path of the offending key, e.g. `termination.max_iterations`.
    pub key: String,
    /// 1-based line in the document, when it can be located.
    pub line: Option<usize>,
    pub reason: String,
}
