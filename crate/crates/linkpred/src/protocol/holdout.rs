//! Random split of one release into train, validation and test pairs.

use std::collections::BTreeSet;

use linkpred_core::amf::NegativeSampler;
use linkpred_core::seed::{self, derive_seed};
use linkpred_core::{CandidateSet, InteractionGraph, NodeId, Pair, PairSet};
use rand::seq::SliceRandom;

use super::stage::{run_two_stage, Stage, TwoStageSummary, TWO_STAGE_SEEDS};
use super::{required, ProtocolError};
use crate::config::ExperimentConfig;
use crate::io;

/// Every edge of `g` labeled positive, then `round(ratio·|E|)` distinct
/// sampled non-edges (capped at the number of non-edges) labeled negative.
pub fn holdout_pool(g: &InteractionGraph, ratio: f64, seed: u64) -> Result<Vec<(Pair, bool)>, ProtocolError> {
    let mut pool: Vec<(Pair, bool)> = g.edges().map(|p| (p, true)).collect();
    let wanted = ((pool.len() as f64 * ratio).round() as usize).min(g.non_edge_count());
    pool.extend(distinct_non_edges(g, wanted, seed)?.into_iter().map(|p| (p, false)));
    Ok(pool)
}

fn distinct_non_edges(g: &InteractionGraph, count: usize, seed: u64) -> Result<Vec<Pair>, ProtocolError> {
    let mut rng = seed::rng(seed, 0);
    if count == 0 {
        return Ok(Vec::new());
    }
    // Rejection sampling slows down as the pool nears the non-edge count.
    if count * 2 >= g.non_edge_count() {
        let n = g.node_count() as NodeId;
        let mut all: Vec<Pair> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| Pair::new(u, v)))
            .filter(|&p| !g.contains(p))
            .collect();
        all.shuffle(&mut rng);
        all.truncate(count);
        return Ok(all);
    }
    let sampler = NegativeSampler::new(g, None)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = sampler.draw(&mut rng);
        if seen.insert(p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// `(train, validation, test)` item counts for `n` items.
pub fn split_sizes(n: usize, test_fraction: f64, validation_fraction: f64) -> (usize, usize, usize) {
    let test = (n as f64 * test_fraction).round() as usize;
    let validation = ((n as f64 * validation_fraction).round() as usize).min(n - test);
    (n - test - validation, validation, test)
}

fn candidates(items: &[(Pair, bool)]) -> CandidateSet {
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    CandidateSet {
        pairs: sorted.iter().map(|i| i.0).collect(),
        labels: sorted.iter().map(|i| i.1).collect(),
    }
}

/// Builds the validation and test stages.
///
/// The pool of edges and sampled non-edges is shuffled once and cut into
/// test, validation and train items. The validation stage trains on the
/// train edges; the test stage retrains on train and validation edges.
/// Negatives drawn during training avoid every pair of the later splits.
pub fn holdout_stages(cfg: &ExperimentConfig) -> Result<(Stage, Stage, Vec<String>), ProtocolError> {
    let g = io::load_edge_list(&required(&cfg.graph, "graph")?, cfg.delimiter)?;
    let mut pool = holdout_pool(&g, cfg.negative_pool_ratio, derive_seed(cfg.seed, "holdout-negatives"))?;
    pool.shuffle(&mut seed::rng(derive_seed(cfg.seed, "holdout-split"), 0));
    let (n_train, n_val, n_test) = split_sizes(pool.len(), cfg.test_fraction, cfg.validation_fraction);
    let (test_items, rest) = pool.split_at(n_test);
    let (val_items, train_items) = rest.split_at(n_val);
    let mut notes = vec![format!(
        "holdout pool: {} edges and {} sampled non-edges split {n_train}/{n_val}/{n_test}",
        g.edge_count(),
        pool.len() - g.edge_count()
    )];

    let test_pairs: PairSet = test_items.iter().map(|i| i.0).collect();
    let mut val_reserved = test_pairs.clone();
    val_reserved.extend(val_items.iter().map(|i| i.0));
    let train_edges = train_items.iter().filter(|i| i.1).map(|i| i.0);
    let validation = Stage {
        graph: g.with_edges(train_edges.clone()),
        candidates: candidates(val_items),
        reserved: Some(val_reserved),
    };

    let mut test_candidates = test_items.to_vec();
    if let Some(path) = &cfg.exclusions {
        let names = io::load_name_pairs(path, cfg.delimiter)?;
        let (excluded, dropped) = io::pairs_in_graph(&g, &names);
        let before = test_candidates.len();
        test_candidates.retain(|i| !excluded.contains(&i.0));
        notes.push(format!(
            "exclusions: {} test pairs removed, {} pairs naming absent nodes dropped",
            before - test_candidates.len(),
            dropped
        ));
    }
    let test = Stage {
        graph: g.with_edges(train_edges.chain(val_items.iter().filter(|i| i.1).map(|i| i.0))),
        candidates: candidates(&test_candidates),
        reserved: Some(test_pairs),
    };
    Ok((validation, test, notes))
}

pub fn run_holdout(cfg: &ExperimentConfig) -> Result<TwoStageSummary, ProtocolError> {
    let (validation, test, notes) = holdout_stages(cfg)?;
    let mut seeds = TWO_STAGE_SEEDS.to_vec();
    seeds.extend(["holdout-negatives", "holdout-split"]);
    run_two_stage(cfg, &validation, &test, &seeds, &notes)
}
