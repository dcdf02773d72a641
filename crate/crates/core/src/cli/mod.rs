//! Scenario-driven front end: eigen reports, simulations and sweeps.
//!
//! A scenario is one JSON document. Simulations write `timeseries.csv`
//! (floats with 17 significant digits, `\n` line endings) and `summary.json`,
//! which embeds the scenario with every default filled in.

mod format;
pub mod run;
pub mod scenario;

pub use run::{header, run_eigen, run_simulate, run_sweep, write_simulation, Simulation, Summary};
pub use scenario::{set_parameter, InitialState, Output, Preset, Scenario, TimeGrid};

use crate::error::Error;

/// Process exit code for configuration problems.
pub const EXIT_CONFIG: i32 = 2;
/// Process exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("config error: unknown parameter path `{0}` (expected a dotted path to a number)")]
    UnknownParameterPath(String),

    #[error("numerical failure while {context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: Error,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numerical { .. } => EXIT_NUMERICAL,
            Self::Config(_) | Self::UnknownParameterPath(_) | Self::Io(_) => EXIT_CONFIG,
        }
    }
}
