//! Library half of the `properlab` command-line tool.

pub mod certify;
pub mod commands;
pub mod corpus;
pub mod exit;

pub use exit::{CliError, CliResult, ExitCode};

/// Environment variable that overrides the enumeration cap.
pub const CAP_ENV: &str = "PROPERLAB_CAP";
