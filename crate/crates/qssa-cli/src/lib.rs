//! Command-line front end for the QSSA toolkit: configuration
//! ingestion, scenario execution and deterministic CSV/JSON emission.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_approx, cmd_compare, cmd_scale, cmd_simulate, cmd_stability, ApproachArg, CliError,
    RegimeArg,
};
pub use config::{load_scenario, ScenarioConfig};
