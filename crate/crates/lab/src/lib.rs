//! Experiment harness, file formats and command-line front end for the
//! `erw-core` kernels.

pub mod cli;
pub mod config;
pub mod error;
pub mod exact;
pub mod harness;
pub mod io;
pub mod results;

pub use config::{EstimatorKind, ExperimentConfig, Kind, Threshold};
pub use error::{LabError, LabResult};
pub use harness::{run_experiment, run_replicates};
pub use results::{ResultRecord, ResultSet};
