use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};

use super::adam::{AdamConfig, AdamState};
use super::model::{accumulate, AmfModel, LabeledPair, Scratch};
use super::sampling::NegativeSampler;
use super::AmfError;
use crate::graph::InteractionGraph;
use crate::math;
use crate::pairs::PairSet;
use crate::seed;

/// Hyperparameters of one training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Embedding size.
    pub k: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Negatives drawn per positive in every epoch.
    pub neg_ratio: f64,
    pub seed: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::retrospective()
    }
}

impl TrainConfig {
    /// Settings tuned for training on one release and predicting the next.
    pub fn retrospective() -> Self {
        TrainConfig {
            k: 256,
            dropout: 0.3,
            learning_rate: 0.01,
            epochs: 5,
            batch_size: 1024,
            neg_ratio: 1.0,
            seed: 0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
        }
    }

    /// Settings tuned for random holdout splits of a single release.
    pub fn holdout() -> Self {
        TrainConfig {
            k: 512,
            epochs: 6,
            batch_size: 256,
            ..Self::retrospective()
        }
    }

    /// Settings tuned for k-fold cross-validation.
    pub fn cross_validation() -> Self {
        TrainConfig {
            k: 64,
            dropout: 0.5,
            epochs: 40,
            batch_size: 256,
            ..Self::retrospective()
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }

    pub fn validate(&self) -> Result<(), AmfError> {
        if self.k == 0 {
            return Err(AmfError::InvalidConfig("embedding size must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(AmfError::InvalidConfig("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(AmfError::InvalidConfig("batch size must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(AmfError::InvalidConfig("dropout must lie in [0, 1)"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(AmfError::InvalidConfig("learning rate must be positive"));
        }
        if !(self.neg_ratio > 0.0 && self.neg_ratio.is_finite()) {
            return Err(AmfError::InvalidConfig("negative ratio must be positive"));
        }
        Ok(())
    }
}

/// Expected number of embedding coordinates that survive dropout on both
/// sides of a pair: `k·(1−p)²`.
pub fn expected_untouched_entries(k: usize, dropout: f64) -> f64 {
    k as f64 * (1.0 - dropout) * (1.0 - dropout)
}

const INIT_STREAM: u64 = 0;
const TRAIN_STREAM: u64 = 1;

/// Glorot-normal embeddings (fan in = fan out = k) and combination weights
/// (fan in = k, fan out = 1); biases start at zero.
pub fn init_model(nodes: usize, cfg: &TrainConfig) -> AmfModel {
    let k = cfg.k;
    let mut rng = seed::rng(cfg.seed, INIT_STREAM);
    let mut model = AmfModel::zeros(nodes, k);
    let emb_std = math::sqrt(2.0 / (2 * k) as f64);
    let combo_std = math::sqrt(2.0 / (k + 1) as f64);
    let emb = Normal::new(0.0, emb_std).expect("finite std");
    let combo = Normal::new(0.0, combo_std).expect("finite std");
    let layout = model.layout();
    let params = model.params_mut();
    for p in &mut params[..nodes * k] {
        *p = emb.sample(&mut rng);
    }
    for p in &mut params[layout.combo()] {
        *p = combo.sample(&mut rng);
    }
    model
}

/// A trained model and the mean per-example training loss of every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub model: AmfModel,
    pub epoch_losses: Vec<f64>,
}

/// Trains on every edge of `g`.
pub fn train(g: &InteractionGraph, cfg: &TrainConfig) -> Result<AmfModel, AmfError> {
    train_with(g, cfg, None).map(|out| out.model)
}

/// Trains on every edge of `g`; negatives avoid the `reserved` pairs.
///
/// Each epoch uses all edges as positives plus `round(|E|·neg_ratio)` fresh
/// negatives, shuffled together and cut into mini-batches. The batch gradient
/// is the sum over the batch.
pub fn train_with(
    g: &InteractionGraph,
    cfg: &TrainConfig,
    reserved: Option<&PairSet>,
) -> Result<TrainOutput, AmfError> {
    cfg.validate()?;
    if g.edge_count() == 0 {
        return Err(AmfError::NoEdges);
    }
    let sampler = NegativeSampler::new(g, reserved)?;
    let mut model = init_model(g.node_count(), cfg);
    let mut rng = seed::rng(cfg.seed, TRAIN_STREAM);
    let adam = cfg.adam();
    let mut state = AdamState::new(model.params().len());
    let mut grad = vec![0.0; model.params().len()];
    let mut scratch = Scratch::new(cfg.k);

    let positives: Vec<LabeledPair> = g.edges().map(|p| LabeledPair::new(p, true)).collect();
    let neg_count = (libm::round(positives.len() as f64 * cfg.neg_ratio) as usize).max(1);
    let mut examples = Vec::with_capacity(positives.len() + neg_count);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        examples.clear();
        examples.extend_from_slice(&positives);
        examples.extend(sampler.sample(neg_count, &mut rng).into_iter().map(|p| LabeledPair::new(p, false)));
        examples.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        for batch in examples.chunks(cfg.batch_size) {
            grad.fill(0.0);
            let dropout = (cfg.dropout > 0.0).then_some((cfg.dropout, &mut rng));
            epoch_loss += accumulate(&model, batch, dropout, &mut grad, &mut scratch);
            state.update(&adam, model.params_mut(), &grad);
        }
        epoch_losses.push(epoch_loss / examples.len() as f64);
    }
    debug_assert!(model.is_finite());
    Ok(TrainOutput { model, epoch_losses })
}
