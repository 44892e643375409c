//! Configured sweeps, their records, and the acceptance suite.

pub mod acceptance;
pub mod config;
pub mod record;
pub mod sweep;

pub use config::{ExperimentConfig, PolicyKind};
pub use record::{ExperimentRecord, OutputFormat, RecordWriter};
pub use sweep::{run_point, run_sweep, run_sweep_to_path, run_sweep_with_threads, sweep_points, SweepPoint, World};
