//! Ranking unseen pairs with a saved model, the propagation sweep and
//! embedding export.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::path::{Path, PathBuf};

use linkpred_core::propagation::propagate_factors;
use linkpred_core::seed::derive_seed;
use linkpred_core::{AmfModel, CandidateSet, NodeId, Pair, PairScorer};

use super::holdout::holdout_stages;
use super::retrospective::retrospective_stages;
use super::stage::{alpha_curve, train_amf, Stage};
use super::ProtocolError;
use crate::config::{ExperimentConfig, Protocol};
use crate::io::{self, PredictionRow};
use crate::parallel::score_pairs;

/// The `top_n` highest-scored pairs, by descending score and then by the
/// lexicographically ordered name pair.
pub fn rank_predictions(
    names: &[String],
    pairs: &[Pair],
    scores: &[f64],
    labels: Option<&[bool]>,
    top_n: usize,
) -> Vec<PredictionRow> {
    let ordered = |p: Pair| {
        let (a, b) = (&names[p.lo() as usize], &names[p.hi() as usize]);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    };
    let by_rank = |&x: &usize, &y: &usize| -> Ordering {
        scores[y]
            .total_cmp(&scores[x])
            .then_with(|| ordered(pairs[x]).cmp(&ordered(pairs[y])))
    };
    let mut idx: Vec<usize> = (0..pairs.len()).collect();
    if top_n < idx.len() {
        idx.select_nth_unstable_by(top_n, by_rank);
        idx.truncate(top_n);
    }
    idx.sort_unstable_by(by_rank);
    idx.into_iter()
        .map(|i| {
            let (a, b) = ordered(pairs[i]);
            PredictionRow {
                drug_a: a.clone(),
                drug_b: b.clone(),
                score: scores[i],
                label: labels.map(|l| l[i]),
            }
        })
        .collect()
}

/// Inputs of [`run_predict`].
#[derive(Debug, Clone, PartialEq)]
pub struct PredictRequest {
    /// Embedding table written by a protocol run or the export command.
    pub model: PathBuf,
    pub graph: PathBuf,
    pub delimiter: char,
    pub exclusions: Option<PathBuf>,
    pub top_n: usize,
    pub output: PathBuf,
}

/// A saved model seen through the node ids of another graph.
struct Remapped<'a> {
    model: &'a AmfModel,
    ids: Vec<NodeId>,
}

impl PairScorer for Remapped<'_> {
    fn node_count(&self) -> usize {
        self.ids.len()
    }

    fn score(&self, pair: Pair) -> f64 {
        self.model.predict(self.ids[pair.lo() as usize], self.ids[pair.hi() as usize])
    }
}

/// Scores every non-edge of the graph that is not excluded and writes the
/// `top_n` best as `drug_a,drug_b,score`. Every graph node must be in the
/// model; extra model nodes are ignored.
pub fn run_predict(req: &PredictRequest) -> Result<Vec<PredictionRow>, ProtocolError> {
    let table = io::read_embeddings(&req.model)?;
    let g = io::load_edge_list(&req.graph, req.delimiter)?;
    let lookup: HashMap<&str, NodeId> = table
        .names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i as NodeId))
        .collect();
    let ids = g
        .names()
        .iter()
        .map(|n| lookup.get(n.as_str()).copied().ok_or_else(|| ProtocolError::UnknownNode(n.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let excluded = match &req.exclusions {
        Some(path) => io::pairs_in_graph(&g, &io::load_name_pairs(path, req.delimiter)?).0,
        None => Default::default(),
    };
    let n = g.node_count() as NodeId;
    let pairs: Vec<Pair> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| Pair::new(u, v)))
        .filter(|p| !g.contains(*p) && !excluded.contains(p))
        .collect();
    let scorer = Remapped { model: &table.model, ids };
    let scores = score_pairs(&scorer, &pairs);
    let rows = rank_predictions(g.names(), &pairs, &scores, None, req.top_n);
    io::write_predictions(&req.output, &rows)?;
    Ok(rows)
}

/// Validation and test AUROC at every value of `cfg.alpha_grid`, using the
/// first model setting. Writes `alpha_sweep.csv` to `cfg.out_dir`.
pub fn propagation_sweep(cfg: &ExperimentConfig) -> Result<Vec<(f64, f64, f64)>, ProtocolError> {
    cfg.validate()?;
    let (validation, test, _) = match cfg.protocol {
        Protocol::Retrospective => retrospective_stages(cfg)?,
        Protocol::Holdout => holdout_stages(cfg)?,
        Protocol::Crossval => {
            return Err(ProtocolError::Invalid(
                "the propagation sweep needs a retrospective or holdout protocol".into(),
            ))
        }
    };
    validation.check_leakage("validation")?;
    test.check_leakage("test")?;
    let tc = &cfg.amf_grid[0];
    let val_model = train_amf(&validation, tc, derive_seed(cfg.seed, "amf-validation"))?;
    let val_curve = alpha_curve(&validation, &val_model, &cfg.alpha_grid)?;
    let test_model = train_amf(&test, tc, derive_seed(cfg.seed, "amf-test"))?;
    let test_curve = alpha_curve(&test, &test_model, &cfg.alpha_grid)?;
    let sweep: Vec<(f64, f64, f64)> = val_curve.iter().zip(&test_curve).map(|(v, t)| (v.0, v.1, t.1)).collect();
    io::create_dir(&cfg.out_dir)?;
    let rows: Vec<Vec<String>> = sweep
        .iter()
        .map(|s| vec![s.0.to_string(), s.1.to_string(), s.2.to_string()])
        .collect();
    io::write_table(&cfg.out_dir.join("alpha_sweep.csv"), &["alpha", "validation_auroc", "test_auroc"], &rows)?;
    Ok(sweep)
}

/// Trains the first model setting on every edge of `graph` and writes its
/// embeddings, propagated by `alpha` when given.
pub fn export_embeddings(
    cfg: &ExperimentConfig,
    graph: &Path,
    alpha: Option<f64>,
    output: &Path,
) -> Result<AmfModel, ProtocolError> {
    cfg.validate()?;
    let g = io::load_edge_list(graph, cfg.delimiter)?;
    let stage = Stage {
        graph: g,
        candidates: CandidateSet::default(),
        reserved: None,
    };
    let mut model = train_amf(&stage, &cfg.amf_grid[0], derive_seed(cfg.seed, "amf-export"))?;
    if let Some(a) = alpha {
        model = propagate_factors(&stage.graph, &model, a)?;
    }
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        io::create_dir(dir)?;
    }
    io::write_embeddings(output, stage.graph.names(), &model, alpha)?;
    Ok(model)
}
