use std::fmt;
use std::process::ExitCode;

use dimsurgery_core::Error;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters outside a command's domain.
    Usage(String),
    Io(String),
    /// A check ran and failed.
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Verify(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Verify(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => CliError::Io(io.to_string()),
            Error::Domain { .. }
            | Error::InvalidArgument(_)
            | Error::SizeGuard { .. }
            | Error::TooShort { .. }
            | Error::LengthMismatch { .. }
            | Error::Estimator(_)
            | Error::NoBufferHeadroom { .. }
            | Error::Parse(_)
            | Error::Malformed(_) => CliError::Usage(e.to_string()),
            Error::CoverBound { .. } | Error::BufferCheck { .. } | Error::PlanInvariant(_) => {
                CliError::Verify(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
