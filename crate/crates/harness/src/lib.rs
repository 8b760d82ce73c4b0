//! Configuration, scenario library, sweep drivers and bit-exact outputs for
//! the crystal surface solvers. The `crystal` binary is a thin shell over
//! [`run_scenario`].

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod output;
pub mod run;
pub mod scenario;
pub mod sweep;
pub mod verify;

pub use config::{Mode, ScenarioConfig};
pub use run::{run_scenario, RunReport};
pub use scenario::Scenario;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("{checks} verification check(s) violated:\n{details}")]
    Violations { checks: usize, details: String },
}

impl HarnessError {
    /// 1 for config and I/O errors, 2 for solver failures, 3 for violated
    /// checks in verify mode.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } => 1,
            HarnessError::Solver(_) => 2,
            HarnessError::Violations { .. } => 3,
        }
    }
}

/// Reads a config file; `mode`, `seed` and `out` override the file.
pub fn load_config(
    path: &std::path::Path,
    mode: Mode,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<ScenarioConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })?;
    let mut config = ScenarioConfig::parse(&text, Some(mode))?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(out) = out {
        config.output.dir = out;
    }
    Ok(config)
}
