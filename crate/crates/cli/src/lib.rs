//! Scenario files and the `cat0` command-line driver.

pub mod run;
pub mod scenario;

use thiserror::Error;

pub use run::{execute, load, Command, Outcome, Overrides};
pub use scenario::{parse_scenario, Scenario, ScenarioError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Scenario { path: String, source: ScenarioError },

    #[error("{0}")]
    Invalid(String),

    #[error("{context}: {source}")]
    Core { context: String, source: cat0::Error },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario { .. } | CliError::Invalid(_) => run::EXIT_PARSE,
            CliError::Io { .. } => run::EXIT_IO,
            CliError::Core { source, .. } => {
                let mut e = source;
                while let cat0::Error::Iteration { source, .. } = e {
                    e = source;
                }
                match e {
                    cat0::Error::ConvergenceFailure { .. } => run::EXIT_NOT_CONVERGED,
                    _ => run::EXIT_PARSE,
                }
            }
        }
    }
}
