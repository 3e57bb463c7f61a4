//! Batch experiment driver for the `cone-minkowski` engine.
//!
//! A JSON [`ExperimentConfig`](config::ExperimentConfig) selects the cone,
//! the surface and the resolutions; each command returns an
//! [`output::Bundle`] of checks and report files.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{ConeSpec, ExperimentConfig, ProfileSpec, Suite, SweepGrid, Thresholds};
pub use error::CliError;
pub use output::{Bundle, Check, Status};
pub use runner::{run_spectrum, run_stability, run_sweep, run_verify, SweepAxis, SweepRow};
