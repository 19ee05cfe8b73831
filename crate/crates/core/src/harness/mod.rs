//! Experiment configuration, parameter sweeps and result files.

pub mod analyze;
pub mod config;
pub mod output;
pub mod sweep;

pub use config::{Algorithm, ExperimentConfig, TopologyKind};
pub use sweep::{run_sweep, run_sweep_to_file, SweepResult, SweepRow};
