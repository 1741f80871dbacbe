use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::gbt::{gbt_train, GbtParams};
use super::{EnsembleError, FeatureMatrix};
use crate::metrics::auroc_scores;
use crate::seed;

/// Candidate values for randomized hyperparameter search. Every draw picks
/// one value from each list independently and uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpec {
    pub rounds: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub min_child_weight: Vec<f64>,
    pub subsample: Vec<f64>,
    pub draws: usize,
    pub seed: u64,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec {
            rounds: vec![50, 100, 200],
            max_depth: vec![2, 3, 4, 6],
            learning_rate: vec![0.05, 0.1, 0.3],
            min_child_weight: vec![1.0, 5.0],
            subsample: vec![0.8, 1.0],
            draws: 10,
            seed: 0,
        }
    }
}

impl SearchSpec {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        let empty = self.rounds.is_empty()
            || self.max_depth.is_empty()
            || self.learning_rate.is_empty()
            || self.min_child_weight.is_empty()
            || self.subsample.is_empty();
        if self.draws == 0 || empty {
            return Err(EnsembleError::EmptySearch);
        }
        Ok(())
    }

    /// The `draws` parameter combinations, in evaluation order.
    pub fn sample(&self) -> Result<Vec<GbtParams>, EnsembleError> {
        self.validate()?;
        let mut rng = seed::rng(self.seed, 0);
        let model_seed = seed::derive_seed(self.seed, "gbt");
        Ok((0..self.draws)
            .map(|_| GbtParams {
                rounds: self.rounds[rng.random_range(0..self.rounds.len())],
                max_depth: self.max_depth[rng.random_range(0..self.max_depth.len())],
                learning_rate: self.learning_rate[rng.random_range(0..self.learning_rate.len())],
                min_child_weight: self.min_child_weight[rng.random_range(0..self.min_child_weight.len())],
                subsample: self.subsample[rng.random_range(0..self.subsample.len())],
                seed: model_seed,
                ..GbtParams::default()
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: GbtParams,
    pub best_auroc: f64,
    /// Every evaluated combination with its validation AUROC.
    pub evaluated: Vec<(GbtParams, f64)>,
}

/// Trains one booster per sampled combination and keeps the one with the
/// highest validation AUROC; the earliest wins ties.
pub fn random_search(
    spec: &SearchSpec,
    train: &FeatureMatrix,
    valid: &FeatureMatrix,
) -> Result<SearchOutcome, EnsembleError> {
    let labels = valid.labels().ok_or(EnsembleError::MissingLabels)?;
    let mut evaluated = Vec::with_capacity(spec.draws);
    let mut best: Option<(GbtParams, f64)> = None;
    for params in spec.sample()? {
        let model = gbt_train(train, &params)?;
        let auc = auroc_scores(&model.predict(valid)?, labels)?;
        if best.map_or(true, |(_, b)| auc > b) {
            best = Some((params, auc));
        }
        evaluated.push((params, auc));
    }
    let (best, best_auroc) = best.expect("at least one draw");
    Ok(SearchOutcome {
        best,
        best_auroc,
        evaluated,
    })
}
