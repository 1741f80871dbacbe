//! Worker pool helpers. All results are collected in input order, so the
//! output never depends on the number of threads.

use linkpred_core::metrics::{BootstrapComparison, PairedBootstrap};
use linkpred_core::{MetricsError, Pair, PairScorer, ScoredPairs};
use rayon::prelude::*;

/// Runs `f` on a pool of `workers` threads (0 = one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}

/// Scores every pair, in order.
pub fn score_pairs(scorer: &dyn PairScorer, pairs: &[Pair]) -> Vec<f64> {
    pairs.par_iter().with_min_len(256).map(|&p| scorer.score(p)).collect()
}

/// Paired bootstrap comparison with resamples spread over the pool.
pub fn bootstrap_compare(
    a: &ScoredPairs,
    b: &ScoredPairs,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapComparison, MetricsError> {
    let boot = PairedBootstrap::new(a, b)?;
    let deltas: Vec<Option<f64>> = (0..resamples as u64)
        .into_par_iter()
        .map(|r| boot.resample_delta(seed, r))
        .collect();
    let deltas: Vec<f64> = deltas.into_iter().flatten().collect();
    boot.summarize(&deltas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use linkpred_core::metrics::paired_bootstrap_compare;

    #[test]
    fn parallel_bootstrap_matches_sequential() {
        let n = 300u32;
        let pairs: Vec<Pair> = (0..n).map(|i| Pair::new(i, i + 1)).collect();
        let labels: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
        let a: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64 + f64::from(u8::from(i % 3 == 0)) * 30.0).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i * 104_729) % 97) as f64).collect();
        let a = ScoredPairs::new(pairs.clone(), a, labels.clone()).unwrap();
        let b = ScoredPairs::new(pairs, b, labels).unwrap();
        let seq = paired_bootstrap_compare(&a, &b, 200, 3).unwrap();
        for workers in [1, 4] {
            let par = with_workers(workers, || bootstrap_compare(&a, &b, 200, 3)).unwrap().unwrap();
            assert_eq!(par, seq);
        }
    }
}
