use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed snapshot {path}: {reason}")]
    Snapshot { path: String, reason: String },

    #[error("solver failure: {0}")]
    Solver(rlogse::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Io { .. } | CliError::Snapshot { .. } => 3,
            CliError::Solver(_) => 4,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<rlogse::Error> for CliError {
    fn from(e: rlogse::Error) -> Self {
        match e {
            rlogse::Error::Config { key, reason } => CliError::Config { key, reason },
            rlogse::Error::Study(reason) => CliError::Config {
                key: "study".into(),
                reason,
            },
            other => CliError::Solver(other),
        }
    }
}
