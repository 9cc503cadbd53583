use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: line {line}: {message}")]
    Format { path: String, line: u64, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid experiment spec: {0}")]
    Spec(String),

    #[error(transparent)]
    Estimation(#[from] diknn_core::Error),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit status: 2 for usage, input and spec problems, 3 when
    /// the data are too short, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use diknn_core::Error as Core;
        match self {
            CliError::Estimation(Core::InsufficientData { .. }) => 3,
            CliError::Estimation(Core::Numerical(_)) => 4,
            _ => 2,
        }
    }
}
