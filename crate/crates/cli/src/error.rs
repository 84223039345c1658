use std::io;
use std::path::PathBuf;

use pdls_core::PdlsError;
use thiserror::Error;

use crate::pgm::PgmError;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: PdlsError,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: PgmError,
    },

    #[error("{}: {reason}", path.display())]
    Malformed { path: PathBuf, reason: String },

    #[error("missing runs: {}", list_paths(.0))]
    MissingRuns(Vec<PathBuf>),
}

fn list_paths(paths: &[PathBuf]) -> String {
    paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ")
}

impl CliError {
    pub fn core(context: impl Into<String>, source: PdlsError) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        CliError::Csv {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        CliError::Malformed {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit status: 2 configuration, 3 numerical failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core { source, .. } => match source {
                PdlsError::DriftDiverged { .. }
                | PdlsError::DegeneratePosterior
                | PdlsError::TerminalSingularity { .. }
                | PdlsError::ConditionalSingular { .. }
                | PdlsError::CoverageUnreachable { .. } => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            },
            CliError::Io { .. }
            | CliError::Csv { .. }
            | CliError::Image { .. }
            | CliError::Malformed { .. }
            | CliError::MissingRuns(_) => EXIT_IO,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::core("s1", PdlsError::DriftDiverged { step: 3 }).exit_code(), 3);
        assert_eq!(
            CliError::core("s1", PdlsError::FactorMustDivide { width: 31, height: 31, factor: 8 }).exit_code(),
            2
        );
        assert_eq!(CliError::io("a", io::Error::other("x")).exit_code(), 4);
        assert_eq!(CliError::MissingRuns(vec!["r".into()]).exit_code(), 4);
    }

    #[test]
    fn core_errors_carry_the_input() {
        let e = CliError::core("disk_003_s1", PdlsError::FactorMustDivide { width: 31, height: 31, factor: 8 });
        let msg = e.to_string();
        assert!(msg.starts_with("disk_003_s1: "));
        assert!(msg.contains("factor must divide dimensions"));
    }
}
