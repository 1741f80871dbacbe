//! Evaluation protocols and the prediction/export workflows.
//!
//! Retrospective and holdout runs share one shape: a validation stage that
//! picks the model settings and propagation factor and fits the ensemble,
//! then a test stage that retrains on more data and evaluates every
//! predictor. They differ only in how the two stages are built.

mod crossval;
mod holdout;
mod predict;
mod retrospective;
mod stage;

use std::path::PathBuf;

use linkpred_core::{AmfError, EnsembleError, GraphError, MetricsError};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, Protocol};
use crate::io::IoError;

pub use crossval::{run_crossval, CrossvalSummary, FoldResult};
pub use holdout::{holdout_pool, holdout_stages, run_holdout, split_sizes};
pub use predict::{export_embeddings, propagation_sweep, rank_predictions, run_predict, PredictRequest};
pub use retrospective::{retrospective_stages, run_retrospective};
pub use stage::{Stage, TwoStageSummary};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Amf(#[from] AmfError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("`{0}` must be set for this protocol")]
    MissingPath(&'static str),
    #[error("{stage} stage: {count} evaluation pairs are training edges")]
    Leakage { stage: &'static str, count: usize },
    #[error("graph node `{0}` is not in the model")]
    UnknownNode(String),
    #[error("{0}")]
    Invalid(String),
}

/// What a protocol run produced.
#[derive(Debug, Clone)]
pub enum RunSummary {
    TwoStage(TwoStageSummary),
    Crossval(CrossvalSummary),
}

/// Runs `cfg.protocol` on a pool of `cfg.workers` threads.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary, ProtocolError> {
    cfg.validate()?;
    crate::parallel::with_workers(cfg.workers, || match cfg.protocol {
        Protocol::Retrospective => run_retrospective(cfg).map(RunSummary::TwoStage),
        Protocol::Holdout => run_holdout(cfg).map(RunSummary::TwoStage),
        Protocol::Crossval => run_crossval(cfg).map(RunSummary::Crossval),
    })?
}

fn required(path: &Option<PathBuf>, key: &'static str) -> Result<PathBuf, ProtocolError> {
    path.clone().ok_or(ProtocolError::MissingPath(key))
}
