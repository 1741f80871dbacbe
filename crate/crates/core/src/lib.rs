//! Link prediction over undirected interaction graphs.
//!
//! This crate holds the algorithmic half of the toolkit and only needs `alloc`:
//!
//! - [`graph`]: immutable undirected graphs, edge-list parsing, release alignment
//!   and candidate enumeration.
//! - [`similarity`]: neighbourhood similarity indices (common neighbours, their
//!   averaged forms, Jaccard, Adamic/Adar, truncated Katz) and a profile
//!   fingerprint baseline.
//! - [`amf`]: the shared-embedding factorization model, trained with Adam on
//!   binary cross-entropy against freshly sampled negatives.
//! - [`propagation`]: one round of neighbourhood-mean propagation of trained
//!   latent factors.
//! - [`ensemble`]: a Newton-boosted tree stacker over base predictor scores.
//! - [`metrics`]: ROC/PR areas, precision at n, per-node precision at n and a
//!   paired bootstrap comparison.
//!
//! File IO, experiment protocols and the command line live in the `linkpred`
//! crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod amf;
pub mod ensemble;
pub mod graph;
mod math;
pub mod metrics;
pub mod pairs;
pub mod propagation;
pub mod seed;
pub mod similarity;

pub use amf::{AmfError, AmfModel, TrainConfig};
pub use ensemble::{EnsembleError, FeatureMatrix, GbtModel, GbtParams, SearchSpec};
pub use graph::{GraphError, InteractionGraph, NodeId, ReleasePair};
pub use metrics::{EvalReport, MetricsError};
pub use pairs::{CandidateSet, Pair, PairScorer, PairSet, ScoredPairs};
pub use propagation::PropagationConfig;
pub use similarity::{Measure, SimilarityIndex, SimilarityParams};
