//! Experiment harness for the `o2nc-core` conversion: configs, seeded
//! replications, bound checks and CSV/JSON artifacts.

pub mod config;
pub mod error;
pub mod experiment;
pub mod params;
pub mod records;
pub mod regret_check;
pub mod summary;

pub use config::{ExperimentConfig, RunPlan};
pub use error::{LabError, Result};
