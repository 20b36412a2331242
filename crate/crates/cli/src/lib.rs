//! Config-driven runner for the simulation toolkit: each subcommand loads a
//! JSON experiment description, executes it deterministically under a single
//! seed, and writes CSV artifacts with a JSON provenance sidecar.

use std::path::PathBuf;

pub mod config;
pub mod run;

pub use config::ExperimentKind;
pub use run::execute;

/// Command-line inputs shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub config: PathBuf,
    /// Overrides the config's seed.
    pub seed: Option<u64>,
    /// Overrides the config's mitigation arm (vqe and landscape only).
    pub arm: Option<String>,
    /// Overrides the config's output directory.
    pub out: Option<PathBuf>,
}

/// Failure classes mapped to process exit codes: configuration problems
/// (malformed schema, missing files, invalid values) exit 2 before any
/// simulation starts; runtime problems (simulation or output errors) exit 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}
