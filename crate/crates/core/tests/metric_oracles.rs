use linkpred_core::metrics::{
    aupr_scores, auroc_scores, paired_bootstrap_compare, per_drug_avg_precision_at, pr_curve, precision_at, roc_curve,
    trapezoid_area,
};
use linkpred_core::{MetricsError, Pair, ScoredPairs};
use proptest::prelude::*;

/// Fraction of (positive, negative) pairs ordered correctly, ties counting half.
fn pairwise_auroc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut wins, mut total) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            total += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / total
}

/// Step area from thresholding at every distinct score.
fn threshold_aupr(scores: &[f64], labels: &[bool]) -> f64 {
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let (mut area, mut prev) = (0.0, 0.0);
    for t in thresholds {
        let tp = scores.iter().zip(labels).filter(|&(&s, &l)| s >= t && l).count() as f64;
        let called = scores.iter().filter(|&&s| s >= t).count() as f64;
        let recall = tp / pos;
        area += (recall - prev) * (tp / called);
        prev = recall;
    }
    area
}

/// Scores on a coarse grid so that ties are common, plus labels with both classes.
fn arb_instance(max_len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2..=max_len)
        .prop_flat_map(|n| (prop::collection::vec(0u8..8, n), prop::collection::vec(any::<bool>(), n)))
        .prop_filter("both classes", |(_, l)| l.iter().any(|&x| x) && l.iter().any(|&x| !x))
        .prop_map(|(s, l)| (s.into_iter().map(|v| f64::from(v) / 8.0).collect(), l))
}

fn scored(scores: &[f64], labels: &[bool]) -> ScoredPairs {
    let pairs = (0..scores.len() as u32).map(|i| Pair::new(i, i + 1)).collect();
    ScoredPairs::new(pairs, scores.to_vec(), labels.to_vec()).unwrap()
}

#[test]
fn aupr_hand_enumerated_fixtures() {
    // distinct scores: R = .5,.5,1,1 and P = 1,1/2,2/3,1/2
    let a = aupr_scores(&[0.9, 0.8, 0.7, 0.6], &[true, false, true, false]).unwrap();
    assert_eq!(a, 0.5 * 1.0 + 0.5 * (2.0 / 3.0));
    // a tie block of one positive and one negative enters as a single step
    let b = aupr_scores(&[0.9, 0.9, 0.5], &[true, false, true]).unwrap();
    assert_eq!(b, 0.5 * 0.5 + 0.5 * (2.0 / 3.0));
    // perfect ranking
    assert_eq!(aupr_scores(&[3.0, 2.0, 1.0, 0.0], &[true, true, false, false]).unwrap(), 1.0);
    // all tied: one step to full recall at the base rate
    assert_eq!(aupr_scores(&[1.0; 6], &[true, false, false, true, false, false]).unwrap(), 1.0 / 3.0);
    // worst ranking of two positives among six
    let w = aupr_scores(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0], &[false, false, false, false, true, true]).unwrap();
    assert_eq!(w, 0.5 * 0.2 + 0.5 * (2.0 / 6.0));
    assert_eq!(aupr_scores(&[1.0, 2.0], &[false, false]), Err(MetricsError::NoPositives));
}

#[test]
fn exhaustive_six_element_aupr_matches_thresholding() {
    let scores = [0.5, 0.25, 0.5, 0.75, 0.0, 0.25];
    for mask in 1u32..64 {
        let labels: Vec<bool> = (0..6).map(|i| mask >> i & 1 == 1).collect();
        assert_eq!(aupr_scores(&scores, &labels).unwrap(), threshold_aupr(&scores, &labels));
    }
}

#[test]
fn bootstrap_separates_informative_from_random_scores() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let n = 10_000u32;
    let labels: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    let pairs: Vec<Pair> = (0..n).map(|i| Pair::new(i, i + 1)).collect();
    let good: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l)) + rng.random::<f64>()).collect();
    let noise: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let a = ScoredPairs::new(pairs.clone(), good, labels.clone()).unwrap();
    let b = ScoredPairs::new(pairs, noise, labels).unwrap();
    let cmp = paired_bootstrap_compare(&a, &b, 1000, 5).unwrap();
    assert!(cmp.p_value < 0.01, "{cmp:?}");
    assert!(cmp.ci_low > 0.0 && cmp.ci_low <= cmp.delta && cmp.delta <= cmp.ci_high);
    assert_eq!(cmp.resamples, 1000);

    let same = paired_bootstrap_compare(&a, &a, 200, 5).unwrap();
    assert_eq!((same.delta, same.p_value), (0.0, 1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn auroc_matches_pairwise_oracle((scores, labels) in arb_instance(40)) {
        let fast = auroc_scores(&scores, &labels).unwrap();
        prop_assert!((fast - pairwise_auroc(&scores, &labels)).abs() <= 1e-12);
        let roc = roc_curve(&scores, &labels).unwrap();
        prop_assert!((trapezoid_area(&roc) - fast).abs() <= 1e-12);
        prop_assert_eq!(roc.first().copied(), Some((0.0, 0.0)));
        prop_assert_eq!(roc.last().copied(), Some((1.0, 1.0)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn auroc_of_negated_scores_is_complement((scores, labels) in arb_instance(40)) {
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let sum = auroc_scores(&scores, &labels).unwrap() + auroc_scores(&neg, &labels).unwrap();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn monotone_transforms_preserve_every_metric((scores, labels) in arb_instance(30)) {
        let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
        prop_assert_eq!(auroc_scores(&scores, &labels).unwrap(), auroc_scores(&warped, &labels).unwrap());
        prop_assert_eq!(aupr_scores(&scores, &labels).unwrap(), aupr_scores(&warped, &labels).unwrap());
        let (a, b) = (scored(&scores, &labels), scored(&warped, &labels));
        for n in 1..=scores.len() {
            prop_assert_eq!(precision_at(&a, n).unwrap(), precision_at(&b, n).unwrap());
        }
        prop_assert_eq!(per_drug_avg_precision_at(&a, 2).unwrap(), per_drug_avg_precision_at(&b, 2).unwrap());
    }

    #[test]
    fn aupr_matches_thresholding_and_is_bounded((scores, labels) in arb_instance(6)) {
        let a = aupr_scores(&scores, &labels).unwrap();
        prop_assert_eq!(a, threshold_aupr(&scores, &labels));
        prop_assert!(a > 0.0 && a <= 1.0);
        let curve = pr_curve(&scores, &labels).unwrap();
        prop_assert_eq!(curve.last().unwrap().0, 1.0);
    }

    #[test]
    fn precision_at_full_length_is_base_rate((scores, labels) in arb_instance(30)) {
        let sp = scored(&scores, &labels);
        let pos = labels.iter().filter(|&&l| l).count() as f64;
        prop_assert_eq!(precision_at(&sp, scores.len()).unwrap(), pos / scores.len() as f64);
        for n in 1..=scores.len() {
            let p = precision_at(&sp, n).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
