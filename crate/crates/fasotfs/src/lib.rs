//! Experiment runner on top of [`fasotfs_core`]: JSON configs, parameter
//! sweeps, fit checks, CSV output and pass/fail reports.

pub mod config;
pub mod csvio;
pub mod dump;
pub mod error;
pub mod fitcheck;
pub mod methods;
pub mod parallel;
pub mod report;
pub mod sweep;

pub use config::{ExperimentConfig, Overrides};
pub use error::{Error, Result};
