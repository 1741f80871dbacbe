//! Adjacency matrix factorization.
//!
//! Each node owns one embedding row and one bias, shared between both sides
//! of a pair. A pair is scored as
//!
//! ```text
//! σ( Σ_w c_w · p_{i,w} · p_{j,w} + b_i + b_j + g )
//! ```
//!
//! with learned combination weights `c` and a global bias `g`. Training
//! minimises summed binary cross-entropy over all edges plus negatives drawn
//! afresh every epoch, using Adam and inverted dropout on the two embedding
//! rows of every example.

mod adam;
mod model;
mod sampling;
mod train;

use thiserror::Error;

pub use adam::{AdamConfig, AdamState};
pub use model::{gradients, loss, AmfModel, LabeledPair};
pub use sampling::{sample_negatives, NegativeSampler};
pub use train::{expected_untouched_entries, init_model, train, train_with, TrainConfig, TrainOutput};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmfError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("graph has no non-edges left to sample as negatives")]
    NoNegatives,
    #[error("graph has no edges to train on")]
    NoEdges,
    #[error("model has {model} nodes but the graph has {graph}")]
    DimensionMismatch { model: usize, graph: usize },
    #[error("parameter block sizes do not match embedding size {k} and {nodes} nodes")]
    ShapeMismatch { k: usize, nodes: usize },
    #[error("propagation factor must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
}
