use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::AmfError;
use crate::graph::NodeId;
use crate::math;
use crate::pairs::{Pair, PairScorer};
use crate::seed::Rng;

/// Offsets of the parameter blocks inside one flat vector:
/// embeddings `M·k`, node biases `M`, combination weights `k`, global bias `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    pub nodes: usize,
    pub k: usize,
}

impl Layout {
    pub fn len(self) -> usize {
        self.nodes * self.k + self.nodes + self.k + 1
    }

    #[inline]
    pub fn row(self, i: NodeId) -> core::ops::Range<usize> {
        let start = i as usize * self.k;
        start..start + self.k
    }

    #[inline]
    pub fn bias(self, i: NodeId) -> usize {
        self.nodes * self.k + i as usize
    }

    #[inline]
    pub fn combo(self) -> core::ops::Range<usize> {
        let start = self.nodes * self.k + self.nodes;
        start..start + self.k
    }

    #[inline]
    pub fn global(self) -> usize {
        self.len() - 1
    }
}

/// A trained (or initialised) factorization model.
#[derive(Debug, Clone, PartialEq)]
pub struct AmfModel {
    layout: Layout,
    params: Vec<f64>,
}

/// One training or evaluation example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledPair {
    pub pair: Pair,
    pub label: bool,
}

impl LabeledPair {
    pub fn new(pair: Pair, label: bool) -> Self {
        LabeledPair { pair, label }
    }
}

impl AmfModel {
    /// All parameters zero.
    pub fn zeros(nodes: usize, k: usize) -> Self {
        let layout = Layout { nodes, k };
        AmfModel {
            layout,
            params: vec![0.0; layout.len()],
        }
    }

    /// Assembles a model from its blocks; `embeddings` is row-major `nodes × k`.
    pub fn from_parts(
        k: usize,
        embeddings: &[f64],
        node_bias: &[f64],
        combo_weights: &[f64],
        global_bias: f64,
    ) -> Result<Self, AmfError> {
        let nodes = node_bias.len();
        if k == 0 || embeddings.len() != nodes * k || combo_weights.len() != k {
            return Err(AmfError::ShapeMismatch { k, nodes });
        }
        let mut params = Vec::with_capacity(Layout { nodes, k }.len());
        params.extend_from_slice(embeddings);
        params.extend_from_slice(node_bias);
        params.extend_from_slice(combo_weights);
        params.push(global_bias);
        Ok(AmfModel {
            layout: Layout { nodes, k },
            params,
        })
    }

    pub fn node_count(&self) -> usize {
        self.layout.nodes
    }

    /// Embedding size.
    pub fn k(&self) -> usize {
        self.layout.k
    }

    pub(crate) fn layout(&self) -> Layout {
        self.layout
    }

    pub fn embedding(&self, i: NodeId) -> &[f64] {
        &self.params[self.layout.row(i)]
    }

    pub fn embedding_mut(&mut self, i: NodeId) -> &mut [f64] {
        let r = self.layout.row(i);
        &mut self.params[r]
    }

    /// All embeddings, row-major.
    pub fn embeddings(&self) -> &[f64] {
        &self.params[..self.layout.nodes * self.layout.k]
    }

    pub fn node_bias(&self, i: NodeId) -> f64 {
        self.params[self.layout.bias(i)]
    }

    pub fn set_node_bias(&mut self, i: NodeId, value: f64) {
        let idx = self.layout.bias(i);
        self.params[idx] = value;
    }

    pub fn combo_weights(&self) -> &[f64] {
        &self.params[self.layout.combo()]
    }

    pub fn combo_weights_mut(&mut self) -> &mut [f64] {
        let r = self.layout.combo();
        &mut self.params[r]
    }

    pub fn global_bias(&self) -> f64 {
        self.params[self.layout.global()]
    }

    pub fn set_global_bias(&mut self, value: f64) {
        let idx = self.layout.global();
        self.params[idx] = value;
    }

    /// Every parameter in layout order.
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// Pre-sigmoid score of `(i, j)`; argument order does not matter.
    pub fn logit(&self, i: NodeId, j: NodeId) -> f64 {
        let (i, j) = (i.min(j), i.max(j));
        let (pi, pj, c) = (self.embedding(i), self.embedding(j), self.combo_weights());
        let mut z = 0.0;
        for w in 0..self.layout.k {
            z += c[w] * (pi[w] * pj[w]);
        }
        z + self.node_bias(i) + self.node_bias(j) + self.global_bias()
    }

    /// Interaction probability of `(i, j)`; dropout is never applied here.
    pub fn predict(&self, i: NodeId, j: NodeId) -> f64 {
        math::sigmoid(self.logit(i, j))
    }
}

impl PairScorer for AmfModel {
    fn node_count(&self) -> usize {
        self.layout.nodes
    }

    fn score(&self, pair: Pair) -> f64 {
        self.predict(pair.lo(), pair.hi())
    }
}

/// Summed binary cross-entropy of `batch`.
pub fn loss(model: &AmfModel, batch: &[LabeledPair]) -> f64 {
    batch
        .iter()
        .map(|ex| math::bce(model.predict(ex.pair.lo(), ex.pair.hi()), ex.label))
        .sum()
}

/// Gradient of [`loss`] with respect to every parameter, flat in the model's
/// layout. Rows and biases of nodes absent from `batch` stay zero.
pub fn gradients(model: &AmfModel, batch: &[LabeledPair]) -> Vec<f64> {
    let mut grad = vec![0.0; model.params.len()];
    accumulate(model, batch, None, &mut grad, &mut Scratch::new(model.k()));
    grad
}

/// Reusable per-example buffers.
pub(crate) struct Scratch {
    mask_i: Vec<f64>,
    mask_j: Vec<f64>,
    pi: Vec<f64>,
    pj: Vec<f64>,
}

impl Scratch {
    pub fn new(k: usize) -> Self {
        Scratch {
            mask_i: vec![1.0; k],
            mask_j: vec![1.0; k],
            pi: vec![0.0; k],
            pj: vec![0.0; k],
        }
    }
}

fn draw_mask(mask: &mut [f64], drop: f64, rng: &mut Rng) {
    let keep_scale = 1.0 / (1.0 - drop);
    for m in mask {
        *m = if rng.random::<f64>() < drop { 0.0 } else { keep_scale };
    }
}

/// Adds the batch gradient into `grad` and returns the batch loss.
///
/// With `dropout = Some((p, rng))`, each example draws an independent inverted
/// dropout mask for each of its two embedding rows.
///
/// The output gradient is `ŷ − y` per example; the clip inside the loss only
/// matters at saturation and is ignored here.
pub(crate) fn accumulate(
    model: &AmfModel,
    batch: &[LabeledPair],
    mut dropout: Option<(f64, &mut Rng)>,
    grad: &mut [f64],
    scratch: &mut Scratch,
) -> f64 {
    let layout = model.layout;
    let k = layout.k;
    let c = model.combo_weights();
    let mut total = 0.0;
    for ex in batch {
        let (i, j) = (ex.pair.lo(), ex.pair.hi());
        if let Some((p, rng)) = dropout.as_mut() {
            draw_mask(&mut scratch.mask_i, *p, rng);
            draw_mask(&mut scratch.mask_j, *p, rng);
        }
        let (ei, ej) = (model.embedding(i), model.embedding(j));
        let mut z = 0.0;
        for w in 0..k {
            scratch.pi[w] = ei[w] * scratch.mask_i[w];
            scratch.pj[w] = ej[w] * scratch.mask_j[w];
            z += c[w] * (scratch.pi[w] * scratch.pj[w]);
        }
        z += model.node_bias(i) + model.node_bias(j) + model.global_bias();
        let y_hat = math::sigmoid(z);
        total += math::bce(y_hat, ex.label);

        let d = y_hat - if ex.label { 1.0 } else { 0.0 };
        grad[layout.global()] += d;
        grad[layout.bias(i)] += d;
        grad[layout.bias(j)] += d;
        let combo = layout.combo().start;
        for w in 0..k {
            grad[combo + w] += d * scratch.pi[w] * scratch.pj[w];
        }
        let (ri, rj) = (layout.row(i).start, layout.row(j).start);
        for w in 0..k {
            grad[ri + w] += d * c[w] * scratch.pj[w] * scratch.mask_i[w];
            grad[rj + w] += d * c[w] * scratch.pi[w] * scratch.mask_j[w];
        }
    }
    total
}
