//! Experiment tooling for doubly-fair dynamic pricing: TOML experiment
//! specs, CSV and JSON outputs, parallel seed sweeps with log-log slope
//! fits, the paired perturbation comparison and the acceptance suite.
//!
//! All numerics live in [`fairprice_core`].

pub mod compare;
pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod validate;

pub use config::ExperimentSpec;
pub use error::{Error, Result};
