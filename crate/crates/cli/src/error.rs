use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An input file was read but its contents are unusable.
    #[error("{path}: {detail}")]
    Input { path: PathBuf, detail: String },

    #[error(transparent)]
    Core(#[from] spectral_bounds::Error),

    #[error("writing output: {0}")]
    Csv(#[from] csv::Error),

    #[error("writing output: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use spectral_bounds::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Input { .. } | CliError::Csv(_) | CliError::Json(_) => 3,
            CliError::Core(E::Domain { .. } | E::Argument(_)) => 2,
            CliError::Core(E::Resolution { .. } | E::Numerical { .. }) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
