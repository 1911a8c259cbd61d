//! Experiment runner for Jante's law processes: configuration files,
//! deterministic parallel ensembles, bound verification and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod ensemble;
pub mod io;
pub mod seed;
pub mod stats;
pub mod verify;

pub use config::{ChainKind, ConfigError, Experiment, RunConfig};
pub use ensemble::{run_ensemble, run_one, Collect, Ensemble, RunSummary};
