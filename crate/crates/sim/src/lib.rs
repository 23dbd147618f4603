//! Automated stand-in for the human in the evolution loop.
//!
//! [`run_experiment`] drives populations toward a target image with a scripted
//! [`AutoSelector`], one [`Trajectory`] per seed, and [`summarize`] reduces a
//! batch of trajectories to ratio and convergence statistics. [`remote`] runs
//! the same protocol against a live service.

pub mod config;
mod error;
pub mod remote;
pub mod run;
pub mod summary;

pub use config::{parse_seeds, AutoSelector, ExperimentConfig, GeneratorChoice, Schedule, TargetSpec};
pub use error::SimError;
pub use run::{best_iteration_ratio, run_experiment, run_seed, Prepared, Results, Trajectory};
pub use summary::{summarize, Bin, Summary, CONVERGENCE_FRACTION};
