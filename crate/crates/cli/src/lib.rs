//! Library side of the batch front end. The binary in `main.rs` is a
//! thin argument-parsing shell over the command functions here, which
//! keeps every command drivable from integration tests.

pub mod analysis;
pub mod chart;
pub mod commands;
pub mod config;
pub mod report;
pub mod tables;

/// Process exit codes, a stable contract for scripting: 0 success,
/// 1 usage/config error, 2 data error.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Data(e) => format!("{e:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;
