//! Repeated stratified k-fold cross-validation on one release.

use std::path::PathBuf;

use linkpred_core::metrics::{aupr_scores, auroc_scores};
use linkpred_core::propagation::propagate_factors;
use linkpred_core::seed::{self, derive_seed};
use linkpred_core::{CandidateSet, Pair, PairSet};
use rand::seq::SliceRandom;

use super::holdout::holdout_pool;
use super::stage::{base_columns, train_amf, write_manifest, Stage};
use super::{required, ProtocolError};
use crate::config::{ExperimentConfig, Predictor};
use crate::io;
use crate::report::{render_table, write_metrics, MetricRow};

/// Scores of one predictor on one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub repeat: usize,
    pub fold: usize,
    pub predictor: String,
    pub auroc: f64,
    pub aupr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossvalSummary {
    pub folds: Vec<FoldResult>,
    /// `(predictor, AUROC mean, AUROC std, AUPR mean, AUPR std)`.
    pub means: Vec<(String, f64, f64, f64, f64)>,
    pub out_dir: PathBuf,
}

/// Mean and sample standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Fold of every item: classes are shuffled separately and dealt round
/// robin, so fold sizes differ by at most one per class.
fn assign_folds(pool: &[(Pair, bool)], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = seed::rng(seed, 0);
    let mut fold = vec![0; pool.len()];
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].1 == class).collect();
        idx.shuffle(&mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            fold[i] = k % folds;
        }
    }
    fold
}

/// Trains the first model setting per fold and scores AMF, AMFP at the
/// configured alpha and the similarity measures. The ensemble is skipped.
pub fn run_crossval(cfg: &ExperimentConfig) -> Result<CrossvalSummary, ProtocolError> {
    let g = io::load_edge_list(&required(&cfg.graph, "graph")?, cfg.delimiter)?;
    if g.edge_count() < cfg.folds {
        return Err(ProtocolError::Invalid(format!(
            "{} edges cannot fill {} folds",
            g.edge_count(),
            cfg.folds
        )));
    }
    let predictors: Vec<Predictor> = cfg.predictors.iter().copied().filter(|&p| p != Predictor::Ensemble).collect();
    let base = ExperimentConfig {
        predictors: predictors.clone(),
        ..cfg.clone()
    };
    let mut results = Vec::new();
    for repeat in 0..cfg.repeats {
        let rs = derive_seed(cfg.seed, &format!("repeat-{repeat}"));
        let pool = holdout_pool(&g, cfg.negative_pool_ratio, derive_seed(rs, "crossval-negatives"))?;
        let fold_of = assign_folds(&pool, cfg.folds, derive_seed(rs, "crossval-split"));
        for fold in 0..cfg.folds {
            let mut test: Vec<(Pair, bool)> = pool.iter().zip(&fold_of).filter(|x| *x.1 == fold).map(|x| *x.0).collect();
            test.sort_unstable();
            let train = pool.iter().zip(&fold_of).filter(|x| *x.1 != fold && x.0 .1).map(|x| x.0 .0);
            let stage = Stage {
                graph: g.with_edges(train),
                candidates: CandidateSet {
                    pairs: test.iter().map(|t| t.0).collect(),
                    labels: test.iter().map(|t| t.1).collect(),
                },
                reserved: Some(test.iter().map(|t| t.0).collect::<PairSet>()),
            };
            stage.check_leakage("crossval")?;
            let amf = train_amf(&stage, &cfg.amf_grid[0], derive_seed(rs, &format!("fold-{fold}")))?;
            let amfp = propagate_factors(&stage.graph, &amf, cfg.alpha)?;
            for (p, scores) in base_columns(&base, &stage, &amf, &amfp) {
                results.push(FoldResult {
                    repeat,
                    fold,
                    predictor: p.name().to_string(),
                    auroc: auroc_scores(&scores, &stage.candidates.labels)?,
                    aupr: aupr_scores(&scores, &stage.candidates.labels)?,
                });
            }
        }
    }

    let mut means = Vec::new();
    let mut rows = Vec::new();
    for p in &predictors {
        let mine: Vec<&FoldResult> = results.iter().filter(|r| r.predictor == p.name()).collect();
        let (am, asd) = mean_std(&mine.iter().map(|r| r.auroc).collect::<Vec<_>>());
        let (pm, psd) = mean_std(&mine.iter().map(|r| r.aupr).collect::<Vec<_>>());
        rows.extend([
            MetricRow::new("auroc_mean", p.name(), am),
            MetricRow::new("auroc_std", p.name(), asd),
            MetricRow::new("aupr_mean", p.name(), pm),
            MetricRow::new("aupr_std", p.name(), psd),
        ]);
        means.push((p.name().to_string(), am, asd, pm, psd));
    }

    let out = &cfg.out_dir;
    io::create_dir(out)?;
    write_metrics(&out.join("metrics.csv"), &rows)?;
    let fold_rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.repeat.to_string(),
                r.fold.to_string(),
                r.predictor.clone(),
                r.auroc.to_string(),
                r.aupr.to_string(),
            ]
        })
        .collect();
    io::write_table(&out.join("folds.csv"), &["repeat", "fold", "predictor", "auroc", "aupr"], &fold_rows)?;

    let mut summary = vec![format!(
        "{} repeats of {}-fold cross-validation over {} edges; alpha={}",
        cfg.repeats,
        cfg.folds,
        g.edge_count(),
        cfg.alpha
    )];
    if cfg.uses(Predictor::Ensemble) {
        summary.push("ensemble skipped: cross-validation has no validation stage".into());
    }
    let mut report = render_table(&format!("{}-fold cross-validation", cfg.folds), &rows);
    report.push('\n');
    for line in &summary {
        report.push_str(line);
        report.push('\n');
    }
    io::write_text(&out.join("report.txt"), &report)?;
    let labels: Vec<String> = (0..cfg.repeats).map(|r| format!("repeat-{r}")).collect();
    let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
    write_manifest(&out.join("manifest.txt"), cfg, &labels, &summary)?;

    Ok(CrossvalSummary {
        folds: results,
        means,
        out_dir: out.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_stratified() {
        let pool: Vec<(Pair, bool)> = (0..23u32).map(|i| (Pair::new(i, i + 100), i < 11)).collect();
        let fold = assign_folds(&pool, 3, 5);
        for class in [true, false] {
            let sizes: Vec<usize> = (0..3)
                .map(|f| (0..pool.len()).filter(|&i| pool[i].1 == class && fold[i] == f).count())
                .collect();
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, "{sizes:?}");
        }
    }

    #[test]
    fn sample_standard_deviation() {
        assert_eq!(mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).0, 5.0);
        assert!((mean_std(&[1.0, 3.0]).1 - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    }
}
