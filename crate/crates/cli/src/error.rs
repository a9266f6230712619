use std::path::Path;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid input files.
    #[error("{0}")]
    Usage(String),
    /// A numerical routine failed on valid input.
    #[error("{0}")]
    Solver(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot serialize report: {0}")]
    Serialize(serde_json::Error),
    #[error("cannot write CSV: {0}")]
    Csv(csv::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn solver(e: impl std::fmt::Display) -> Self {
        Self::Solver(e.to_string())
    }

    pub fn usage(e: impl std::fmt::Display) -> Self {
        Self::Usage(e.to_string())
    }

    /// 1 for input and file problems, 2 for solver failures.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Usage(_) | Self::Io { .. } => ExitCode::from(1),
            Self::Solver(_) | Self::Serialize(_) | Self::Csv(_) => ExitCode::from(2),
        }
    }
}
