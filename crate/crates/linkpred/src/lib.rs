//! Edge-list IO, experiment protocols and the `linkpred` command line.
//!
//! The algorithms live in [`linkpred_core`]; this crate reads releases from
//! disk, runs the retrospective, holdout and cross-validation protocols and
//! writes metric tables, curves, rankings and embeddings.

pub mod config;
pub mod io;
pub mod parallel;
pub mod protocol;
pub mod report;

pub use config::{ConfigError, ExperimentConfig, Predictor, Protocol};
pub use protocol::{run, ProtocolError, RunSummary};
