//! Configuration files, CSV/JSON outputs and command orchestration.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{parse_config, read_config, ExperimentConfig};
pub use experiment::{exit_status, run_experiment, Command, ExitStatus, ExperimentSpec, Outcome};
pub use output::{read_snapshots, write_snapshots};
