//! Ranking metrics over scored candidate pairs.
//!
//! Ties are handled the same way everywhere: ROC and PR curves advance one
//! whole block of equal scores at a time, AUROC gives tied positive/negative
//! pairs half credit, and top-n cut-offs order ties by pair id.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use thiserror::Error;

use crate::pairs::{Pair, ScoredPairs};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("metric needs at least one positive and one negative label")]
    SingleClass,
    #[error("metric needs at least one positive label")]
    NoPositives,
    #[error("length mismatch: {pairs} pairs, {scores} scores, {labels} labels")]
    LengthMismatch { pairs: usize, scores: usize, labels: usize },
    #[error("score at index {0} is not finite")]
    NonFiniteScore(usize),
    #[error("pair {0:?} appears more than once")]
    DuplicatePair(Pair),
    #[error("n = {n} is outside 1..={len}")]
    OutOfRange { n: usize, len: usize },
    #[error("no node has a positive candidate")]
    NoNodeWithPositive,
    #[error("compared score lists are over different pairs or labels")]
    MismatchedPairs,
    #[error("every bootstrap resample contained a single class")]
    NoValidResamples,
}

/// Indices sorted by ascending score.
fn ascending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    order
}

/// End offsets (exclusive) of the runs of equal scores along `order`.
fn tie_blocks(order: &[usize], scores: &[f64]) -> Vec<usize> {
    let mut ends = Vec::new();
    for i in 1..order.len() {
        if scores[order[i]] != scores[order[i - 1]] {
            ends.push(i);
        }
    }
    if !order.is_empty() {
        ends.push(order.len());
    }
    ends
}

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&l| l).count();
    (pos, labels.len() - pos)
}

/// Mann–Whitney AUROC from average ranks.
pub fn auroc_scores(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    let order = ascending(scores);
    let mut rank_sum = 0.0;
    let mut start = 0;
    for end in tie_blocks(&order, scores) {
        // ranks start..end (0-based) share the mean rank, 1-based
        let mean_rank = (start + end + 1) as f64 / 2.0;
        let block_pos = order[start..end].iter().filter(|&&i| labels[i]).count();
        rank_sum += mean_rank * block_pos as f64;
        start = end;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

pub fn auroc(sp: &ScoredPairs) -> Result<f64, MetricsError> {
    auroc_scores(sp.scores(), sp.labels())
}

/// Cumulative (true positive, false positive) counts after each tie block,
/// walking from the highest score down.
fn descending_counts(scores: &[f64], labels: &[bool]) -> Vec<(usize, usize)> {
    let mut order = ascending(scores);
    order.reverse();
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    let mut start = 0;
    for end in tie_blocks(&order, scores) {
        for &i in &order[start..end] {
            if labels[i] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        out.push((tp, fp));
        start = end;
    }
    out
}

/// ROC curve as `(false positive rate, true positive rate)` points from
/// `(0, 0)` to `(1, 1)`, one point per distinct score.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<(f64, f64)>, MetricsError> {
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    let mut points = vec![(0.0, 0.0)];
    points.extend(
        descending_counts(scores, labels)
            .into_iter()
            .map(|(tp, fp)| (fp as f64 / neg as f64, tp as f64 / pos as f64)),
    );
    Ok(points)
}

/// Trapezoidal area under a curve given as `(x, y)` points with ascending x.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// Precision–recall curve as `(recall, precision)` points, one per distinct
/// score, from the highest threshold down.
pub fn pr_curve(scores: &[f64], labels: &[bool]) -> Result<Vec<(f64, f64)>, MetricsError> {
    let (pos, _) = class_counts(labels);
    if pos == 0 {
        return Err(MetricsError::NoPositives);
    }
    Ok(descending_counts(scores, labels)
        .into_iter()
        .map(|(tp, fp)| (tp as f64 / pos as f64, tp as f64 / (tp + fp) as f64))
        .collect())
}

/// Step-interpolated area under the PR curve: `Σ (R_k − R_{k−1}) · P_k`.
pub fn aupr_scores(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    for (recall, precision) in pr_curve(scores, labels)? {
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(area)
}

pub fn aupr(sp: &ScoredPairs) -> Result<f64, MetricsError> {
    aupr_scores(sp.scores(), sp.labels())
}

/// Fraction of positives among the `n` best-ranked pairs.
pub fn precision_at(sp: &ScoredPairs, n: usize) -> Result<f64, MetricsError> {
    if n == 0 || n > sp.len() {
        return Err(MetricsError::OutOfRange { n, len: sp.len() });
    }
    let hits = sp.ranking()[..n].iter().filter(|&&i| sp.labels()[i]).count();
    Ok(hits as f64 / n as f64)
}

/// Per-node rankings: for every node that has at least one positive
/// candidate, the candidate indices involving it in ranking order.
fn per_node_rankings(sp: &ScoredPairs) -> Vec<Vec<usize>> {
    let nodes = sp.pairs().iter().map(|p| p.hi() as usize + 1).max().unwrap_or(0);
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for i in sp.ranking() {
        let p = sp.pairs()[i];
        lists[p.lo() as usize].push(i);
        lists[p.hi() as usize].push(i);
    }
    lists
        .into_iter()
        .filter(|list| list.iter().any(|&i| sp.labels()[i]))
        .collect()
}

fn mean_top_precision(rankings: &[Vec<usize>], labels: &[bool], n: usize) -> f64 {
    let total: f64 = rankings
        .iter()
        .map(|list| {
            let top = &list[..n.min(list.len())];
            top.iter().filter(|&&i| labels[i]).count() as f64 / top.len() as f64
        })
        .sum();
    total / rankings.len() as f64
}

/// Mean over nodes of the precision of each node's own top-`n` candidates.
///
/// Only nodes with at least one positive candidate take part; a node with
/// fewer than `n` candidates is scored over all of them.
pub fn per_drug_avg_precision_at(sp: &ScoredPairs, n: usize) -> Result<f64, MetricsError> {
    if n == 0 {
        return Err(MetricsError::OutOfRange { n, len: sp.len() });
    }
    let rankings = per_node_rankings(sp);
    if rankings.is_empty() {
        return Err(MetricsError::NoNodeWithPositive);
    }
    Ok(mean_top_precision(&rankings, sp.labels(), n))
}

/// Everything reported for one predictor on one candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub auroc: f64,
    pub aupr: f64,
    pub roc_points: Vec<(f64, f64)>,
    pub pr_points: Vec<(f64, f64)>,
    pub precision_at: Vec<(usize, f64)>,
    pub per_drug_avg_precision_at: Vec<(usize, f64)>,
    pub positives: usize,
    pub negatives: usize,
    /// Nodes that took part in the per-node averages.
    pub drugs_evaluated: usize,
}

impl EvalReport {
    /// Computes all metrics; precision cut-offs larger than the candidate
    /// count are left out of the table.
    pub fn compute(sp: &ScoredPairs, precision_ns: &[usize], per_drug_ns: &[usize]) -> Result<Self, MetricsError> {
        let auroc = auroc(sp)?;
        let aupr = aupr(sp)?;
        let roc_points = roc_curve(sp.scores(), sp.labels())?;
        let pr_points = pr_curve(sp.scores(), sp.labels())?;
        let ranking = sp.ranking();
        let mut precision = Vec::new();
        let mut hits = 0;
        let mut ns: Vec<usize> = precision_ns.iter().copied().filter(|&n| n >= 1 && n <= sp.len()).collect();
        ns.sort_unstable();
        ns.dedup();
        let mut taken = 0;
        for n in ns {
            while taken < n {
                hits += usize::from(sp.labels()[ranking[taken]]);
                taken += 1;
            }
            precision.push((n, hits as f64 / n as f64));
        }
        let rankings = per_node_rankings(sp);
        let per_drug = per_drug_ns
            .iter()
            .filter(|&&n| n >= 1)
            .map(|&n| (n, mean_top_precision(&rankings, sp.labels(), n)))
            .collect();
        Ok(EvalReport {
            auroc,
            aupr,
            roc_points,
            pr_points,
            precision_at: precision,
            per_drug_avg_precision_at: per_drug,
            positives: sp.positives(),
            negatives: sp.negatives(),
            drugs_evaluated: rankings.len(),
        })
    }
}

/// Outcome of a paired bootstrap comparison of two predictors' AUROC.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapComparison {
    /// `AUROC(a) − AUROC(b)` on the full data.
    pub delta: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Two-sided p-value for a zero difference.
    pub p_value: f64,
    /// Resamples that contained both classes and entered the statistics.
    pub resamples: usize,
}

/// Pre-sorted state for paired bootstrap resampling of two score lists over
/// the same labeled pairs.
#[derive(Debug, Clone)]
pub struct PairedBootstrap {
    labels: Vec<bool>,
    a: SortedScores,
    b: SortedScores,
    delta: f64,
}

#[derive(Debug, Clone)]
struct SortedScores {
    order: Vec<usize>,
    blocks: Vec<usize>,
}

impl SortedScores {
    fn new(scores: &[f64]) -> Self {
        let order = ascending(scores);
        let blocks = tie_blocks(&order, scores);
        SortedScores { order, blocks }
    }

    /// AUROC of the multiset in which item `i` appears `weights[i]` times.
    fn weighted_auroc(&self, labels: &[bool], weights: &[u32]) -> Option<f64> {
        let (mut num, mut neg_below, mut pos_total) = (0.0, 0.0, 0.0);
        let mut start = 0;
        for &end in &self.blocks {
            let (mut wp, mut wn) = (0.0, 0.0);
            for &i in &self.order[start..end] {
                let w = f64::from(weights[i]);
                if labels[i] {
                    wp += w;
                } else {
                    wn += w;
                }
            }
            num += wp * neg_below + 0.5 * wp * wn;
            neg_below += wn;
            pos_total += wp;
            start = end;
        }
        (pos_total > 0.0 && neg_below > 0.0).then(|| num / (pos_total * neg_below))
    }
}

impl PairedBootstrap {
    pub fn new(a: &ScoredPairs, b: &ScoredPairs) -> Result<Self, MetricsError> {
        if a.pairs() != b.pairs() || a.labels() != b.labels() {
            return Err(MetricsError::MismatchedPairs);
        }
        let delta = auroc(a)? - auroc(b)?;
        Ok(PairedBootstrap {
            labels: a.labels().to_vec(),
            a: SortedScores::new(a.scores()),
            b: SortedScores::new(b.scores()),
            delta,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// AUROC difference on resample `index` of the run seeded with `seed`, or
    /// `None` when the resample holds a single class. Each resample has its
    /// own RNG stream, so resamples can be evaluated in any order.
    pub fn resample_delta(&self, seed: u64, index: u64) -> Option<f64> {
        let n = self.labels.len();
        let mut rng = seed::rng(seed, index);
        let mut weights = vec![0u32; n];
        for _ in 0..n {
            weights[rng.random_range(0..n)] += 1;
        }
        Some(self.a.weighted_auroc(&self.labels, &weights)? - self.b.weighted_auroc(&self.labels, &weights)?)
    }

    /// Percentile 95% interval and two-sided p-value from resampled deltas.
    pub fn summarize(&self, deltas: &[f64]) -> Result<BootstrapComparison, MetricsError> {
        if deltas.is_empty() {
            return Err(MetricsError::NoValidResamples);
        }
        let mut sorted = deltas.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let quantile = |q: f64| {
            let pos = q * (sorted.len() - 1) as f64;
            let lo = pos as usize;
            let hi = (lo + 1).min(sorted.len() - 1);
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        };
        let b = sorted.len() as f64;
        let at_or_below = sorted.iter().filter(|&&d| d <= 0.0).count() as f64;
        let at_or_above = sorted.iter().filter(|&&d| d >= 0.0).count() as f64;
        let p_value = (2.0 * at_or_below.min(at_or_above) / b).min(1.0);
        Ok(BootstrapComparison {
            delta: self.delta,
            ci_low: quantile(0.025),
            ci_high: quantile(0.975),
            p_value,
            resamples: sorted.len(),
        })
    }
}

/// Paired bootstrap test of `AUROC(a) − AUROC(b)` over `resamples` resamples.
pub fn paired_bootstrap_compare(
    a: &ScoredPairs,
    b: &ScoredPairs,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapComparison, MetricsError> {
    let boot = PairedBootstrap::new(a, b)?;
    let deltas: Vec<f64> = (0..resamples as u64).filter_map(|r| boot.resample_delta(seed, r)).collect();
    boot.summarize(&deltas)
}
