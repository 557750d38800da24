//! Configuration schema and task implementations behind the `fracstable`
//! binary.

use std::fmt;

pub mod config;
pub mod tasks;

#[derive(Debug)]
pub enum CliError {
    /// Exit status 2.
    Config(String),
    /// Exit status 1.
    Task(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Task(m) => write!(f, "task failed: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Task(_) => 1,
        }
    }
}
