use std::path::PathBuf;

use thiserror::Error;

/// Exit status for each failure class.
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    /// Flag combinations or metadata that do not fit together.
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: pswf_radon::Error,
    },

    #[error("self-test failed: {0}")]
    SelfTest(String),

    #[error(transparent)]
    Core(#[from] pswf_radon::Error),
}

impl CliError {
    pub fn file(path: impl Into<PathBuf>, source: impl Into<pswf_radon::Error>) -> Self {
        CliError::File {
            path: path.into(),
            source: source.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_VALIDATION,
            CliError::SelfTest(_) => EXIT_NUMERICAL,
            CliError::File { source, .. } | CliError::Core(source) => core_exit_code(source),
        }
    }
}

fn core_exit_code(e: &pswf_radon::Error) -> i32 {
    use pswf_radon::Error::*;
    match e {
        InvalidArgument(_) | IndexOutOfRange { .. } | OutsideInterval(_) | GridTooCoarse(_) => EXIT_VALIDATION,
        Io(_) | Parse { .. } | Json(_) => EXIT_IO,
        EigenNonConvergence { .. } | Degenerate(_) | Numerical(_) => EXIT_NUMERICAL,
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}
