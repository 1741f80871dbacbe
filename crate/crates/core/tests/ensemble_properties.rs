use linkpred_core::ensemble::{gbt_train, gbt_train_with_history, random_search, FeatureMatrix, GbtParams, SearchSpec};
use linkpred_core::metrics::auroc_scores;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two features, each carrying a noisy label signal on its own half of the
/// rows and zero on the other half.
fn complementary(rows: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(rows * 2);
    let mut labels = Vec::with_capacity(rows);
    for r in 0..rows {
        let label = rng.random::<bool>();
        let signal = f64::from(u8::from(label)) + rng.random_range(-0.8..0.8) + 1.0;
        if r % 2 == 0 {
            data.extend([signal, 0.0]);
        } else {
            data.extend([0.0, signal]);
        }
        labels.push(label);
    }
    FeatureMatrix::new(vec!["left".into(), "right".into()], data, Some(labels)).unwrap()
}

#[test]
fn stacking_dominates_single_features() {
    let train = complementary(2000, 1);
    let valid = complementary(2000, 2);
    let labels = valid.labels().unwrap();
    let best_single = ["left", "right"]
        .iter()
        .map(|c| auroc_scores(&valid.column(c).unwrap(), labels).unwrap())
        .fold(0.0, f64::max);
    let model = gbt_train(&train, &GbtParams::default()).unwrap();
    let stacked = auroc_scores(&model.predict(&valid).unwrap(), labels).unwrap();
    assert!(stacked >= best_single - 0.01, "stacked {stacked} vs single {best_single}");

    let search = random_search(&SearchSpec { draws: 4, seed: 3, ..SearchSpec::default() }, &train, &valid).unwrap();
    assert!(search.best_auroc >= best_single - 0.01);
}

#[test]
fn training_is_reproducible_and_depth_bounded() {
    let fm = complementary(400, 5);
    for depth in [1, 2, 4] {
        let p = GbtParams { rounds: 30, max_depth: depth, subsample: 0.8, seed: 7, ..GbtParams::default() };
        let a = gbt_train(&fm, &p).unwrap();
        assert_eq!(a, gbt_train(&fm, &p).unwrap());
        assert!(a.trees().iter().all(|t| t.depth() <= depth));
        assert!(a.trees().iter().flat_map(|t| t.leaves()).all(f64::is_finite));
    }
}

fn arb_matrix() -> impl Strategy<Value = FeatureMatrix> {
    (4usize..60, 1usize..4, any::<u64>())
        .prop_map(|(rows, cols, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = (0..rows * cols).map(|_| f64::from(rng.random_range(0u8..6))).collect();
            let mut labels: Vec<bool> = (0..rows).map(|_| rng.random()).collect();
            labels[0] = true;
            labels[1] = false;
            let names = (0..cols).map(|c| format!("f{c}")).collect();
            FeatureMatrix::new(names, data, Some(labels)).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn training_loss_never_increases(fm in arb_matrix(), depth in 1usize..5, lr in 0.05f64..0.5) {
        let p = GbtParams { rounds: 40, max_depth: depth, learning_rate: lr, min_child_weight: 0.0, ..GbtParams::default() };
        let (_, history) = gbt_train_with_history(&fm, &p).unwrap();
        prop_assert_eq!(history.len(), 41);
        for w in history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }
}
