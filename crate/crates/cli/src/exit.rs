use std::fmt;

use properlab::Error;

/// Process exit status contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Ok = 0,
    Parse = 1,
    Invariant = 2,
    Solver = 3,
    Mismatch = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn new(code: ExitCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(ExitCode::Parse, message)
    }

    pub fn mismatch(message: impl Into<String>) -> Self {
        Self::new(ExitCode::Mismatch, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => ExitCode::Parse,
            Error::NonMetricLoss { .. }
            | Error::DuplicateHypothesis { .. }
            | Error::EmptyClass
            | Error::OutOfRangeEntry(_)
            | Error::InvalidDistribution(_) => ExitCode::Invariant,
            _ => ExitCode::Solver,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::parse(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::parse(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
