use std::path::PathBuf;

use coopbif_core::Hypothesis;

/// Failure of a run, mapped onto the process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("hypothesis refused: {0}")]
    Refused(Hypothesis),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Refused(_) => 3,
            RunError::Numerical(_) => 4,
            RunError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> RunError {
        let path = path.into();
        move |source| RunError::Io { path, source }
    }
}

/// Sorts core errors raised while building the problem from a config:
/// refusals stay refusals, everything else is a config problem.
pub(crate) fn from_setup(e: coopbif_core::Error) -> RunError {
    match e {
        coopbif_core::Error::Hypothesis(h) => RunError::Refused(h),
        other => RunError::Config(other.to_string()),
    }
}

/// Errors raised while computing.
pub(crate) fn from_numerics(e: coopbif_core::Error) -> RunError {
    match e {
        coopbif_core::Error::Hypothesis(h) => RunError::Refused(h),
        other => RunError::Numerical(other.to_string()),
    }
}
