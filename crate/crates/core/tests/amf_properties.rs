mod common;

use common::{arb_graph, names};
use linkpred_core::amf::{gradients, loss, train_with, LabeledPair};
use linkpred_core::propagation::propagate_factors;
use linkpred_core::{AmfModel, InteractionGraph, NodeId, Pair, TrainConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_model(nodes: usize, k: usize, rng: &mut ChaCha8Rng) -> AmfModel {
    let mut m = AmfModel::zeros(nodes, k);
    for p in m.params_mut() {
        *p = rng.random_range(-1.0..1.0);
    }
    m
}

fn random_batch(nodes: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<LabeledPair> {
    (0..len)
        .map(|_| {
            let a = rng.random_range(0..nodes as NodeId);
            let b = (a + rng.random_range(1..nodes as NodeId)) % nodes as NodeId;
            LabeledPair::new(Pair::new(a, b), rng.random())
        })
        .collect()
}

/// `‖analytic − numeric‖ / max(‖analytic‖, ‖numeric‖)` with central differences.
fn gradient_relative_error(model: &AmfModel, batch: &[LabeledPair], eps: f64) -> f64 {
    let analytic = gradients(model, batch);
    let mut probe = model.clone();
    let (mut diff, mut na, mut nn) = (0.0, 0.0, 0.0);
    for (idx, &a) in analytic.iter().enumerate() {
        let orig = probe.params()[idx];
        probe.params_mut()[idx] = orig + eps;
        let up = loss(&probe, batch);
        probe.params_mut()[idx] = orig - eps;
        let down = loss(&probe, batch);
        probe.params_mut()[idx] = orig;
        let n = (up - down) / (2.0 * eps);
        diff += (a - n) * (a - n);
        na += a * a;
        nn += n * n;
    }
    diff.sqrt() / na.sqrt().max(nn.sqrt())
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let nodes = rng.random_range(2..9);
        let k = rng.random_range(1..7);
        let model = random_model(nodes, k, &mut rng);
        let batch = random_batch(nodes, rng.random_range(1..12), &mut rng);
        worst = worst.max(gradient_relative_error(&model, &batch, 1e-5));
    }
    assert!(worst < 1e-5, "max relative error {worst}");
}

/// Two blocks of `half` nodes, intra-block edge probability `p_in`, inter `p_out`.
fn planted(half: usize, p_in: f64, p_out: f64, seed: u64) -> InteractionGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * half;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if (u < half) == (v < half) { p_in } else { p_out };
            if rng.random::<f64>() < p {
                edges.push((u as NodeId, v as NodeId));
            }
        }
    }
    InteractionGraph::from_edges(names(n), edges).unwrap()
}

fn small_cfg(seed: u64) -> TrainConfig {
    TrainConfig {
        k: 8,
        dropout: 0.1,
        learning_rate: 0.02,
        epochs: 30,
        batch_size: 16,
        seed,
        ..TrainConfig::default()
    }
}

#[test]
fn training_loss_decreases_on_planted_graph() {
    let g = planted(10, 0.8, 0.05, 1);
    for seed in 0..3 {
        let out = train_with(&g, &small_cfg(seed), None).unwrap();
        let (first, last) = (out.epoch_losses[0], *out.epoch_losses.last().unwrap());
        assert!(last < first, "seed {seed}: {first} -> {last}");
    }
}

#[test]
fn trained_models_are_symmetric_bounded_and_reproducible() {
    let g = planted(10, 0.8, 0.05, 2);
    let model = train_with(&g, &small_cfg(4), None).unwrap().model;
    assert_eq!(model, train_with(&g, &small_cfg(4), None).unwrap().model);
    assert!(model.is_finite());
    for i in 0..20 {
        for j in 0..20 {
            if i != j {
                let p = model.predict(i, j);
                assert_eq!(p, model.predict(j, i));
                assert!(p > 0.0 && p < 1.0);
            }
        }
    }
}

fn neighbour_mean(g: &InteractionGraph, m: &AmfModel, v: NodeId) -> Vec<f64> {
    let nb = g.neighbors(v);
    let mut mean = vec![0.0; m.k()];
    for &u in nb {
        for (q, p) in mean.iter_mut().zip(m.embedding(u)) {
            *q += p / nb.len() as f64;
        }
    }
    mean
}

fn model_for(g: &InteractionGraph, k: usize, seed: u64) -> AmfModel {
    random_model(g.node_count(), k, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn zero_alpha_is_bit_identical(g in arb_graph(12), seed in any::<u64>()) {
        let m = model_for(&g, 3, seed);
        let p = propagate_factors(&g, &m, 0.0).unwrap();
        prop_assert_eq!(p.params(), m.params());
        for i in 0..g.node_count() as NodeId {
            for j in 0..g.node_count() as NodeId {
                prop_assert_eq!(p.predict(i, j).to_bits(), m.predict(i, j).to_bits());
            }
        }
    }

    #[test]
    fn propagated_rows_lie_between_own_and_neighbour_mean(g in arb_graph(12), seed in any::<u64>(), alpha in 0.0f64..=1.0) {
        let m = model_for(&g, 4, seed);
        let p = propagate_factors(&g, &m, alpha).unwrap();
        for v in 0..g.node_count() as NodeId {
            if g.degree(v) == 0 {
                prop_assert_eq!(p.embedding(v), m.embedding(v));
                continue;
            }
            let mean = neighbour_mean(&g, &m, v);
            for ((&new, &old), &q) in p.embedding(v).iter().zip(m.embedding(v)).zip(&mean) {
                prop_assert!(new >= old.min(q) - 1e-12 && new <= old.max(q) + 1e-12);
            }
        }
        prop_assert_eq!(&p.params()[g.node_count() * 4..], &m.params()[g.node_count() * 4..]);
    }

    #[test]
    fn propagation_is_linear_in_alpha(g in arb_graph(12), seed in any::<u64>(), alpha in 0.0f64..=1.0) {
        let m = model_for(&g, 3, seed);
        let (p0, p1) = (propagate_factors(&g, &m, 0.0).unwrap(), propagate_factors(&g, &m, 1.0).unwrap());
        let pa = propagate_factors(&g, &m, alpha).unwrap();
        for ((&a, &x0), &x1) in pa.params().iter().zip(p0.params()).zip(p1.params()) {
            prop_assert!((a - ((1.0 - alpha) * x0 + alpha * x1)).abs() < 1e-12);
        }
    }

    #[test]
    fn relabelling_nodes_permutes_the_result(g in arb_graph(10), seed in any::<u64>(), shift in 1usize..10) {
        let n = g.node_count();
        let perm = |v: NodeId| ((v as usize + shift) % n) as NodeId;
        let m = model_for(&g, 2, seed);
        let relabelled = InteractionGraph::from_edges(names(n), g.edges().map(|p| (perm(p.lo()), perm(p.hi())))).unwrap();
        let mut emb = vec![0.0; n * 2];
        let mut bias = vec![0.0; n];
        for v in 0..n as NodeId {
            let t = perm(v) as usize;
            emb[t * 2..t * 2 + 2].copy_from_slice(m.embedding(v));
            bias[t] = m.node_bias(v);
        }
        let m2 = AmfModel::from_parts(2, &emb, &bias, m.combo_weights(), m.global_bias()).unwrap();
        let (a, b) = (propagate_factors(&g, &m, 0.6).unwrap(), propagate_factors(&relabelled, &m2, 0.6).unwrap());
        for v in 0..n as NodeId {
            for (x, y) in a.embedding(v).iter().zip(b.embedding(perm(v))) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
