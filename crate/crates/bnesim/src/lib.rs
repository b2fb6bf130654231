//! Experiment harness around the core equilibrium-seeking algorithms:
//! TOML configuration, run orchestration, CSV/summary artifacts, byte
//! accounting, and the spectral bound on the surplus gain.

pub mod config;
pub mod eta;
pub mod output;
pub mod runner;

pub use config::{parse_config, ExperimentConfig};
pub use eta::eta_upper_bound;
pub use output::{account_bytes, ByteReport, MetricsRow};
pub use runner::{run, run_oracle, sweep, validate, RunArtifacts};
