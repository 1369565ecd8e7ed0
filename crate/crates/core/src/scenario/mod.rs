//! Scenario configuration, end-to-end runs, caching and output files.

mod config;
pub mod io;
mod run;

pub use config::{parse_positions, ConfigError, Emit, ScenarioConfig};
pub use run::{
    cache_dir, decode_diagnostics, encode_diagnostics, evaluate_config, prepare, run_scenario,
    sweep, sweep_label, Evaluation, Prepared, RunError, RunOutput, CACHE_ENV,
};
