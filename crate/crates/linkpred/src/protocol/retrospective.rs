//! Train on one release, select on the next, evaluate on the one after.

use linkpred_core::graph::{align_releases, candidate_pairs};
use linkpred_core::seed::{self, derive_seed};
use linkpred_core::{InteractionGraph, Pair, PairSet};
use rand::seq::SliceRandom;

use super::stage::{run_two_stage, Stage, TwoStageSummary, TWO_STAGE_SEEDS};
use super::{required, ProtocolError};
use crate::config::ExperimentConfig;
use crate::io;

/// Builds the validation and test stages.
///
/// With three releases `t, t′, t″` the validation stage trains on `t` and
/// scores the new edges of `t′`; the test stage trains on `t′` and scores
/// the new edges of `t″`. Without a middle release, a random share of the
/// edges of `t` is held out so that `t` minus the share stands in for the
/// earlier release and `t` itself for the later one. Exclusions only filter
/// the test candidates.
pub fn retrospective_stages(cfg: &ExperimentConfig) -> Result<(Stage, Stage, Vec<String>), ProtocolError> {
    let first = io::load_edge_list(&required(&cfg.train, "train")?, cfg.delimiter)?;
    let last = io::load_edge_list(&required(&cfg.test, "test")?, cfg.delimiter)?;
    let mut notes = Vec::new();
    let (earlier, middle) = match &cfg.validation {
        Some(path) => (first, io::load_edge_list(path, cfg.delimiter)?),
        None => {
            let reduced = pseudo_release(&first, cfg.pseudo_release_fraction, derive_seed(cfg.seed, "pseudo-release"));
            notes.push(format!(
                "validation release: {} of {} edges of the training release held out",
                first.edge_count() - reduced.edge_count(),
                first.edge_count()
            ));
            (reduced, first)
        }
    };

    let val_pair = align_releases(&earlier, &middle)?;
    let validation = Stage {
        candidates: candidate_pairs(&val_pair, &PairSet::new()),
        graph: val_pair.train,
        reserved: None,
    };

    let test_pair = align_releases(&middle, &last)?;
    let exclusions = match &cfg.exclusions {
        Some(path) => {
            let names = io::load_name_pairs(path, cfg.delimiter)?;
            let (set, dropped) = io::pairs_in_graph(&test_pair.train, &names);
            notes.push(format!("exclusions: {} pairs applied, {} naming absent nodes dropped", set.len(), dropped));
            set
        }
        None => PairSet::new(),
    };
    let test = Stage {
        candidates: candidate_pairs(&test_pair, &exclusions),
        graph: test_pair.train,
        reserved: None,
    };
    Ok((validation, test, notes))
}

/// `g` without a random `fraction` of its edges (at least one, never all).
fn pseudo_release(g: &InteractionGraph, fraction: f64, seed: u64) -> InteractionGraph {
    let mut edges: Vec<Pair> = g.edges().collect();
    edges.shuffle(&mut seed::rng(seed, 0));
    let drop = ((edges.len() as f64 * fraction).round() as usize).clamp(1, edges.len().saturating_sub(1));
    g.with_edges(edges.into_iter().skip(drop))
}

pub fn run_retrospective(cfg: &ExperimentConfig) -> Result<TwoStageSummary, ProtocolError> {
    let (validation, test, notes) = retrospective_stages(cfg)?;
    let mut seeds = TWO_STAGE_SEEDS.to_vec();
    if cfg.validation.is_none() {
        seeds.push("pseudo-release");
    }
    run_two_stage(cfg, &validation, &test, &seeds, &notes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use linkpred_core::graph::parse_edge_list;

    #[test]
    fn pseudo_release_drops_a_share_of_edges() {
        let g = parse_edge_list("a,b\nb,c\nc,d\nd,e\ne,a\na,c\nb,d\nc,e\nd,a\ne,b\n", ',').unwrap();
        let r = pseudo_release(&g, 0.3, 9);
        assert_eq!(r.edge_count(), 7);
        assert_eq!(r.names(), g.names());
        assert!(r.edges().all(|p| g.contains(p)));
        assert_eq!(r, pseudo_release(&g, 0.3, 9));
    }
}
