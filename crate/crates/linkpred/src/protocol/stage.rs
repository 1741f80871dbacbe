//! The validation/test machinery shared by the retrospective and holdout
//! protocols.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use linkpred_core::amf::train_with;
use linkpred_core::ensemble::{from_scored_columns, gbt_train, random_search, SearchOutcome};
use linkpred_core::metrics::{auroc_scores, BootstrapComparison};
use linkpred_core::propagation::propagate_factors;
use linkpred_core::seed::{self, derive_seed};
use linkpred_core::{
    AmfModel, CandidateSet, EvalReport, FeatureMatrix, GbtModel, InteractionGraph, Pair, PairSet,
    SearchSpec, SimilarityIndex, TrainConfig,
};
use rand::seq::SliceRandom;

use super::predict::rank_predictions;
use super::ProtocolError;
use crate::config::{ExperimentConfig, Predictor};
use crate::io;
use crate::parallel::{bootstrap_compare, score_pairs};
use crate::report::{bootstrap_rows, downsample, render_table, report_rows, write_metrics, MetricRow};

/// A training graph and the labeled pairs it is evaluated on.
#[derive(Debug, Clone)]
pub struct Stage {
    pub graph: InteractionGraph,
    pub candidates: CandidateSet,
    /// Pairs the negative sampler must not draw while training on `graph`.
    pub reserved: Option<PairSet>,
}

impl Stage {
    /// Fails when an evaluation pair is already an edge of the training graph.
    pub fn check_leakage(&self, stage: &'static str) -> Result<(), ProtocolError> {
        let count = self.candidates.pairs.iter().filter(|&&p| self.graph.contains(p)).count();
        match count {
            0 => Ok(()),
            count => Err(ProtocolError::Leakage { stage, count }),
        }
    }
}

/// Headline numbers of a retrospective or holdout run.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageSummary {
    /// Index into the model grid of the selected settings.
    pub selected_config: usize,
    pub alpha: f64,
    pub validation_auroc: f64,
    pub validation_candidates: usize,
    pub test_candidates: usize,
    /// `(predictor, AUROC, AUPR)` on the test stage, in config order.
    pub test: Vec<(String, f64, f64)>,
    pub out_dir: PathBuf,
}

impl TwoStageSummary {
    pub fn auroc(&self, name: &str) -> Option<f64> {
        self.test.iter().find(|t| t.0 == name).map(|t| t.1)
    }
}

pub(crate) fn train_amf(stage: &Stage, tc: &TrainConfig, seed: u64) -> Result<AmfModel, ProtocolError> {
    let tc = TrainConfig { seed, ..*tc };
    Ok(train_with(&stage.graph, &tc, stage.reserved.as_ref())?.model)
}

/// Candidate AUROC of the propagated model at every `alphas` value.
pub(crate) fn alpha_curve(stage: &Stage, model: &AmfModel, alphas: &[f64]) -> Result<Vec<(f64, f64)>, ProtocolError> {
    alphas
        .iter()
        .map(|&a| {
            let m = propagate_factors(&stage.graph, model, a)?;
            let scores = score_pairs(&m, &stage.candidates.pairs);
            Ok((a, auroc_scores(&scores, &stage.candidates.labels)?))
        })
        .collect()
}

/// Base predictors to score: the reported ones in config order, then any
/// further ensemble inputs.
fn scored_predictors(cfg: &ExperimentConfig) -> Vec<Predictor> {
    let mut list: Vec<Predictor> = cfg.predictors.iter().copied().filter(|&p| p != Predictor::Ensemble).collect();
    if cfg.uses(Predictor::Ensemble) {
        for &p in &cfg.ensemble_features {
            if !list.contains(&p) {
                list.push(p);
            }
        }
    }
    list
}

/// Scores of every base predictor the run needs.
pub(crate) fn base_columns(
    cfg: &ExperimentConfig,
    stage: &Stage,
    amf: &AmfModel,
    amfp: &AmfModel,
) -> Vec<(Predictor, Vec<f64>)> {
    let pairs = &stage.candidates.pairs;
    let wanted = scored_predictors(cfg);
    let needs_index = wanted.iter().any(|p| matches!(p, Predictor::Similarity(_)));
    let index = needs_index.then(|| SimilarityIndex::new(&stage.graph));
    wanted
        .into_iter()
        .filter_map(|p| {
            let scores = match p {
                Predictor::Amf => score_pairs(amf, pairs),
                Predictor::Amfp => score_pairs(amfp, pairs),
                Predictor::Similarity(m) => {
                    let index = index.as_ref().expect("built when a measure is configured");
                    score_pairs(&index.scorer(m, cfg.similarity), pairs)
                }
                Predictor::Ensemble => return None,
            };
            Some((p, scores))
        })
        .collect()
}

/// The `inputs` columns restricted to `rows`, as a feature matrix.
fn features(
    columns: &[(Predictor, Vec<f64>)],
    inputs: &[Predictor],
    pairs: &[Pair],
    labels: Option<&[bool]>,
    rows: &[usize],
) -> Result<FeatureMatrix, ProtocolError> {
    let cols: Vec<&Vec<f64>> = inputs
        .iter()
        .map(|p| &columns.iter().find(|c| c.0 == *p).expect("ensemble inputs are scored").1)
        .collect();
    let mut data = Vec::with_capacity(rows.len() * cols.len());
    for &r in rows {
        data.extend(cols.iter().map(|s| s[r]));
    }
    let pairs: Vec<Pair> = rows.iter().map(|&r| pairs[r]).collect();
    let labels: Option<Vec<bool>> = labels.map(|l| rows.iter().map(|&r| l[r]).collect());
    let names = inputs.iter().map(|p| p.name().to_string()).collect();
    Ok(from_scored_columns(&pairs, labels.as_deref(), names, data)?)
}

/// Every positive plus an equal number of sampled negatives, in candidate order.
fn ensemble_rows(labels: &[bool], seed: u64) -> Vec<usize> {
    let (mut rows, mut negatives): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| labels[i]);
    negatives.shuffle(&mut seed::rng(seed, 0));
    negatives.truncate(rows.len());
    rows.extend(negatives);
    rows.sort_unstable();
    rows
}

/// Stratified split of `0..labels.len()` into (train, valid) index lists,
/// with `fraction` of each class in valid and at least one of each class on
/// both sides.
pub(crate) fn stratified_split(labels: &[bool], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>), ProtocolError> {
    let mut rng = seed::rng(seed, 0);
    let (mut train, mut valid) = (Vec::new(), Vec::new());
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < 2 {
            return Err(ProtocolError::Invalid(format!(
                "the ensemble needs at least two {} validation rows",
                if class { "positive" } else { "negative" }
            )));
        }
        idx.shuffle(&mut rng);
        let take = ((idx.len() as f64 * fraction).round() as usize).clamp(1, idx.len() - 1);
        valid.extend_from_slice(&idx[..take]);
        train.extend_from_slice(&idx[take..]);
    }
    train.sort_unstable();
    valid.sort_unstable();
    Ok((train, valid))
}

/// Result of the validation stage.
#[derive(Debug, Clone)]
pub(crate) struct Selection {
    pub config_index: usize,
    pub train: TrainConfig,
    pub alpha: f64,
    pub auroc: f64,
    /// `(config index, alpha, AUROC)` for every grid point tried.
    pub grid: Vec<(usize, f64, f64)>,
    /// AUROC against alpha for the selected settings.
    pub sweep: Vec<(f64, f64)>,
    pub reports: Vec<(Predictor, EvalReport)>,
    pub ensemble: Option<GbtModel>,
    pub search: Option<SearchOutcome>,
    pub ensemble_rows: usize,
}

/// Alphas to try; without AMFP only the unpropagated model matters.
fn alphas(cfg: &ExperimentConfig) -> Vec<f64> {
    if scored_predictors(cfg).contains(&Predictor::Amfp) {
        cfg.alpha_grid.clone()
    } else {
        vec![0.0]
    }
}

pub(crate) fn validation_stage(cfg: &ExperimentConfig, stage: &Stage) -> Result<Selection, ProtocolError> {
    let alphas = alphas(cfg);
    let model_seed = derive_seed(cfg.seed, "amf-validation");
    let mut grid = Vec::new();
    struct Best {
        config: usize,
        alpha: f64,
        auroc: f64,
        model: AmfModel,
        curve: Vec<(f64, f64)>,
    }
    let mut best: Option<Best> = None;
    for (ci, tc) in cfg.amf_grid.iter().enumerate() {
        let model = train_amf(stage, tc, model_seed)?;
        let curve = alpha_curve(stage, &model, &alphas)?;
        let mut top: Option<(f64, f64)> = None;
        for &(a, auc) in &curve {
            grid.push((ci, a, auc));
            if top.map_or(true, |t| auc > t.1) {
                top = Some((a, auc));
            }
        }
        let (a, auc) = top.expect("alpha list is non-empty");
        if best.as_ref().map_or(true, |b| auc > b.auroc) {
            best = Some(Best {
                config: ci,
                alpha: a,
                auroc: auc,
                model,
                curve,
            });
        }
    }
    let Best {
        config: config_index,
        alpha,
        auroc,
        model,
        curve: sweep,
    } = best.expect("model grid is non-empty");
    let amfp = propagate_factors(&stage.graph, &model, alpha)?;
    let columns = base_columns(cfg, stage, &model, &amfp);

    let mut reports = Vec::with_capacity(columns.len());
    for (p, scores) in columns.iter().filter(|c| cfg.uses(c.0)) {
        let sp = stage.candidates.with_scores(scores.clone())?;
        reports.push((*p, EvalReport::compute(&sp, &cfg.precision_n, &cfg.per_drug_n)?));
    }

    let (mut ensemble, mut search, mut ensemble_row_count) = (None, None, 0);
    if cfg.uses(Predictor::Ensemble) {
        let labels = &stage.candidates.labels;
        let rows = ensemble_rows(labels, derive_seed(cfg.seed, "ensemble-negatives"));
        let fm = features(&columns, &cfg.ensemble_features, &stage.candidates.pairs, Some(labels), &rows)?;
        let row_labels = fm.labels().expect("labels attached");
        let (train_idx, valid_idx) = stratified_split(row_labels, 0.2, derive_seed(cfg.seed, "ensemble-split"))?;
        let spec = SearchSpec {
            seed: derive_seed(cfg.seed, "ensemble-search"),
            ..cfg.search.clone()
        };
        let outcome = random_search(&spec, &fm.select(&train_idx), &fm.select(&valid_idx))?;
        ensemble = Some(gbt_train(&fm, &outcome.best)?);
        search = Some(outcome);
        ensemble_row_count = rows.len();
    }

    Ok(Selection {
        config_index,
        train: cfg.amf_grid[config_index],
        alpha,
        auroc,
        grid,
        sweep,
        reports,
        ensemble,
        search,
        ensemble_rows: ensemble_row_count,
    })
}

/// Result of the test stage.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub sweep: Vec<(f64, f64)>,
    pub amf: AmfModel,
    pub amfp: AmfModel,
    /// Scores of every configured predictor, in config order.
    pub scores: Vec<(Predictor, Vec<f64>)>,
    pub reports: Vec<(Predictor, EvalReport)>,
    pub reference: Predictor,
    pub comparisons: Vec<(Predictor, BootstrapComparison)>,
    pub features: Option<FeatureMatrix>,
}

/// Predictor the others are compared against.
pub(crate) fn reference(cfg: &ExperimentConfig) -> Predictor {
    [Predictor::Ensemble, Predictor::Amfp]
        .into_iter()
        .find(|&p| cfg.uses(p))
        .unwrap_or(cfg.predictors[0])
}

pub(crate) fn test_stage(cfg: &ExperimentConfig, stage: &Stage, sel: &Selection) -> Result<Evaluation, ProtocolError> {
    let amf = train_amf(stage, &sel.train, derive_seed(cfg.seed, "amf-test"))?;
    let sweep = alpha_curve(stage, &amf, &alphas(cfg))?;
    let amfp = propagate_factors(&stage.graph, &amf, sel.alpha)?;
    let columns = base_columns(cfg, stage, &amf, &amfp);

    let mut feature_matrix = None;
    let mut scores = Vec::with_capacity(cfg.predictors.len());
    for &p in &cfg.predictors {
        let s = match p {
            Predictor::Ensemble => {
                let all: Vec<usize> = (0..stage.candidates.len()).collect();
                let fm = features(
                    &columns,
                    &cfg.ensemble_features,
                    &stage.candidates.pairs,
                    Some(&stage.candidates.labels),
                    &all,
                )?;
                let model = sel.ensemble.as_ref().expect("validation fits the ensemble when configured");
                let s = model.predict(&fm)?;
                feature_matrix = Some(fm);
                s
            }
            p => columns.iter().find(|c| c.0 == p).expect("every base predictor is scored").1.clone(),
        };
        scores.push((p, s));
    }

    let mut reports = Vec::with_capacity(scores.len());
    for (p, s) in &scores {
        let sp = stage.candidates.with_scores(s.clone())?;
        reports.push((*p, EvalReport::compute(&sp, &cfg.precision_n, &cfg.per_drug_n)?));
    }

    let reference = reference(cfg);
    let mut comparisons = Vec::new();
    if cfg.bootstrap_resamples > 0 {
        let ref_scores = &scores.iter().find(|s| s.0 == reference).expect("reference is configured").1;
        let b = stage.candidates.with_scores(ref_scores.clone())?;
        let boot_seed = derive_seed(cfg.seed, "bootstrap");
        for (p, s) in &scores {
            if *p == reference {
                continue;
            }
            let a = stage.candidates.with_scores(s.clone())?;
            comparisons.push((*p, bootstrap_compare(&a, &b, cfg.bootstrap_resamples, boot_seed)?));
        }
    }

    Ok(Evaluation {
        sweep,
        amf,
        amfp,
        scores,
        reports,
        reference,
        comparisons,
        features: feature_matrix,
    })
}

/// Stage seed labels, for the manifest.
pub(crate) const TWO_STAGE_SEEDS: [&str; 6] = [
    "amf-validation",
    "amf-test",
    "ensemble-negatives",
    "ensemble-split",
    "ensemble-search",
    "bootstrap",
];

/// Runs both stages and writes every artifact to `cfg.out_dir`. `notes`
/// describe how the stages were built and go into the manifest.
pub(crate) fn run_two_stage(
    cfg: &ExperimentConfig,
    validation: &Stage,
    test: &Stage,
    seed_labels: &[&str],
    notes: &[String],
) -> Result<TwoStageSummary, ProtocolError> {
    validation.check_leakage("validation")?;
    test.check_leakage("test")?;
    let sel = validation_stage(cfg, validation)?;
    let eval = test_stage(cfg, test, &sel)?;
    write_two_stage(cfg, validation, test, &sel, &eval, seed_labels, notes)?;
    Ok(TwoStageSummary {
        selected_config: sel.config_index,
        alpha: sel.alpha,
        validation_auroc: sel.auroc,
        validation_candidates: validation.candidates.len(),
        test_candidates: test.candidates.len(),
        test: eval
            .reports
            .iter()
            .map(|(p, r)| (p.name().to_string(), r.auroc, r.aupr))
            .collect(),
        out_dir: cfg.out_dir.clone(),
    })
}

fn write_two_stage(
    cfg: &ExperimentConfig,
    validation: &Stage,
    test: &Stage,
    sel: &Selection,
    eval: &Evaluation,
    seed_labels: &[&str],
    notes: &[String],
) -> Result<(), ProtocolError> {
    let out = &cfg.out_dir;
    let curves = out.join("curves");
    io::create_dir(&curves)?;

    let test_rows: Vec<MetricRow> = eval.reports.iter().flat_map(|(p, r)| report_rows(p.name(), r)).collect();
    let boot_rows: Vec<MetricRow> = eval
        .comparisons
        .iter()
        .flat_map(|(p, cmp)| bootstrap_rows(p.name(), eval.reference.name(), cmp))
        .collect();
    let rows: Vec<MetricRow> = test_rows.iter().chain(&boot_rows).cloned().collect();
    write_metrics(&out.join("metrics.csv"), &rows)?;
    let val_rows: Vec<MetricRow> = sel.reports.iter().flat_map(|(p, r)| report_rows(p.name(), r)).collect();
    write_metrics(&out.join("validation_metrics.csv"), &val_rows)?;

    let sweep: Vec<Vec<String>> = sel
        .sweep
        .iter()
        .zip(&eval.sweep)
        .map(|(v, t)| vec![v.0.to_string(), v.1.to_string(), t.1.to_string()])
        .collect();
    io::write_table(&out.join("alpha_sweep.csv"), &["alpha", "validation_auroc", "test_auroc"], &sweep)?;

    for (p, r) in &eval.reports {
        let roc = downsample(&r.roc_points, cfg.curve_points);
        io::write_points(&curves.join(format!("roc_{}.csv", p.name())), ["fpr", "tpr"], &roc)?;
        let pr = downsample(&r.pr_points, cfg.curve_points);
        io::write_points(&curves.join(format!("pr_{}.csv", p.name())), ["recall", "precision"], &pr)?;
    }

    let names = test.graph.names();
    let ref_scores = &eval.scores.iter().find(|s| s.0 == eval.reference).expect("reference is scored").1;
    let ranked = rank_predictions(names, &test.candidates.pairs, ref_scores, Some(&test.candidates.labels), cfg.top_n);
    io::write_predictions(&out.join("predictions.csv"), &ranked)?;
    io::write_embeddings(&out.join("embeddings.tsv"), names, &eval.amf, None)?;
    io::write_embeddings(&out.join("embeddings_amfp.tsv"), names, &eval.amfp, Some(sel.alpha))?;
    if let Some(fm) = &eval.features {
        io::write_features(&out.join("ensemble_features.csv"), names, fm)?;
    }

    let mut summary = Vec::new();
    summary.push(format!(
        "validation: {} nodes, {} training edges, {} candidates ({} positive)",
        validation.graph.node_count(),
        validation.graph.edge_count(),
        validation.candidates.len(),
        validation.candidates.positives()
    ));
    summary.push(format!(
        "test: {} nodes, {} training edges, {} candidates ({} positive)",
        test.graph.node_count(),
        test.graph.edge_count(),
        test.candidates.len(),
        test.candidates.positives()
    ));
    summary.push(format!(
        "selected model settings {} (k={}, dropout={}, learning_rate={}, epochs={}, batch_size={}) with alpha={} at validation AUROC {}",
        sel.config_index, sel.train.k, sel.train.dropout, sel.train.learning_rate, sel.train.epochs, sel.train.batch_size, sel.alpha, sel.auroc
    ));
    for (ci, a, auc) in &sel.grid {
        summary.push(format!("grid settings={ci} alpha={a} validation_auroc={auc}"));
    }
    if let Some(s) = &sel.search {
        let b = &s.best;
        summary.push(format!(
            "ensemble: {} rows, {} draws, best inner AUROC {} (rounds={}, max_depth={}, learning_rate={}, min_child_weight={}, subsample={})",
            sel.ensemble_rows,
            s.evaluated.len(),
            s.best_auroc,
            b.rounds,
            b.max_depth,
            b.learning_rate,
            b.min_child_weight,
            b.subsample
        ));
    }
    for (p, r) in &eval.reports {
        summary.push(format!("test {}: auroc={} aupr={}", p.name(), r.auroc, r.aupr));
    }
    summary.extend(notes.iter().cloned());

    let mut report = render_table("Test", &test_rows);
    report.push('\n');
    if !boot_rows.is_empty() {
        report.push_str(&render_table(&format!("Paired bootstrap against {}", eval.reference), &boot_rows));
        report.push('\n');
    }
    report.push_str(&render_table("Validation", &val_rows));
    report.push('\n');
    for line in &summary {
        let _ = writeln!(report, "{line}");
    }
    io::write_text(&out.join("report.txt"), &report)?;
    write_manifest(&out.join("manifest.txt"), cfg, seed_labels, &summary)?;
    Ok(())
}

/// The resolved config as a replayable config file, with seeds and
/// summaries as comments.
pub(crate) fn write_manifest(
    path: &Path,
    cfg: &ExperimentConfig,
    seed_labels: &[&str],
    summary: &[String],
) -> Result<(), ProtocolError> {
    let mut text = String::new();
    let _ = writeln!(text, "# linkpred {} run manifest", env!("CARGO_PKG_VERSION"));
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let _ = writeln!(text, "# written_unix = {started}");
    text.push_str(&cfg.to_text());
    for label in seed_labels {
        let _ = writeln!(text, "# seed.{label} = {}", derive_seed(cfg.seed, label));
    }
    for line in summary {
        let _ = writeln!(text, "# {line}");
    }
    Ok(io::write_text(path, &text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_rows_balance_classes() {
        let labels: Vec<bool> = (0..50).map(|i| i % 10 == 0).collect();
        let rows = ensemble_rows(&labels, 4);
        assert_eq!(rows.len(), 10);
        assert_eq!(rows.iter().filter(|&&r| labels[r]).count(), 5);
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(rows, ensemble_rows(&labels, 4));
    }

    #[test]
    fn stratified_split_keeps_both_classes() {
        let labels: Vec<bool> = (0..20).map(|i| i < 4).collect();
        let (train, valid) = stratified_split(&labels, 0.2, 1).unwrap();
        assert_eq!(train.len() + valid.len(), 20);
        assert_eq!(valid.iter().filter(|&&i| labels[i]).count(), 1);
        assert_eq!(valid.iter().filter(|&&i| !labels[i]).count(), 3);
        assert!(stratified_split(&[true, false, false], 0.2, 1).is_err());
    }
}
