//! Latent factor propagation over the interaction graph.
//!
//! After training, every node's embedding is blended with the mean embedding
//! of its neighbours: `p'_v = α · mean(p_u, u ∈ Γ(v)) + (1 − α) · p_v`. All
//! nodes read the pre-propagation embeddings, so iteration order is
//! irrelevant. Nodes without neighbours keep their embedding; biases and the
//! combination weights are untouched.

use crate::amf::{AmfError, AmfModel};
use crate::graph::{InteractionGraph, NodeId};

/// Validated propagation factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    alpha: f64,
}

impl PropagationConfig {
    pub fn new(alpha: f64) -> Result<Self, AmfError> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(PropagationConfig { alpha })
        } else {
            Err(AmfError::InvalidAlpha(alpha))
        }
    }

    pub fn alpha(self) -> f64 {
        self.alpha
    }
}

/// One round of neighbourhood-mean propagation; returns a new model.
pub fn propagate_factors(g: &InteractionGraph, model: &AmfModel, alpha: f64) -> Result<AmfModel, AmfError> {
    let alpha = PropagationConfig::new(alpha)?.alpha();
    if model.node_count() != g.node_count() {
        return Err(AmfError::DimensionMismatch {
            model: model.node_count(),
            graph: g.node_count(),
        });
    }
    let mut out = model.clone();
    if alpha == 0.0 {
        return Ok(out);
    }
    let k = model.k();
    let mut mean = alloc::vec![0.0; k];
    for v in 0..g.node_count() as NodeId {
        let nb = g.neighbors(v);
        if nb.is_empty() {
            continue;
        }
        let share = 1.0 / nb.len() as f64;
        mean.fill(0.0);
        for &u in nb {
            for (q, &p) in mean.iter_mut().zip(model.embedding(u)) {
                *q += share * p;
            }
        }
        for ((new, &old), &q) in out.embedding_mut(v).iter_mut().zip(model.embedding(v)).zip(&mean) {
            *new = alpha * q + (1.0 - alpha) * old;
        }
    }
    Ok(out)
}

/// Prediction of the propagated model.
pub fn predict_amfp(g: &InteractionGraph, model: &AmfModel, alpha: f64, i: NodeId, j: NodeId) -> Result<f64, AmfError> {
    Ok(propagate_factors(g, model, alpha)?.predict(i, j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;

    fn star() -> (InteractionGraph, AmfModel) {
        // centre c with leaves x, y; z isolated via an extra name
        let base = parse_edge_list("c,x\nc,y\n", ',').unwrap();
        let mut names = base.names().to_vec();
        names.push("z".into());
        let g = InteractionGraph::from_edges(names, base.edges().map(|p| (p.lo(), p.hi()))).unwrap();
        let model = AmfModel::from_parts(
            2,
            &[0.3, -0.2, 1.0, 0.0, 0.0, 1.0, 0.7, 0.7],
            &[0.1, 0.2, 0.3, 0.4],
            &[1.0, -1.0],
            0.05,
        )
        .unwrap();
        (g, model)
    }

    #[test]
    fn alpha_zero_is_identity() {
        let (g, m) = star();
        assert_eq!(propagate_factors(&g, &m, 0.0).unwrap(), m);
    }

    #[test]
    fn alpha_one_replaces_with_neighbour_mean() {
        let (g, m) = star();
        let p = propagate_factors(&g, &m, 1.0).unwrap();
        assert_eq!(p.embedding(0), &[0.5, 0.5]);
        assert_eq!(p.embedding(1), m.embedding(0));
        assert_eq!(p.embedding(3), m.embedding(3));
        assert_eq!(p.node_bias(2), m.node_bias(2));
        assert_eq!(p.combo_weights(), m.combo_weights());
        assert_eq!(p.global_bias(), m.global_bias());
    }

    #[test]
    fn half_alpha_is_the_midpoint() {
        let (g, m) = star();
        let p0 = propagate_factors(&g, &m, 0.0).unwrap();
        let p1 = propagate_factors(&g, &m, 1.0).unwrap();
        let half = propagate_factors(&g, &m, 0.5).unwrap();
        for (h, (a, b)) in half.params().iter().zip(p0.params().iter().zip(p1.params())) {
            assert!((h - 0.5 * (a + b)).abs() < 1e-15);
        }
    }

    #[test]
    fn errors() {
        let (g, m) = star();
        assert_eq!(propagate_factors(&g, &m, 1.5), Err(AmfError::InvalidAlpha(1.5)));
        let small = AmfModel::zeros(2, 2);
        assert_eq!(
            propagate_factors(&g, &small, 0.5),
            Err(AmfError::DimensionMismatch { model: 2, graph: 4 })
        );
    }

    #[test]
    fn amfp_prediction_matches_amf_at_zero() {
        let (g, m) = star();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(predict_amfp(&g, &m, 0.0, i, j).unwrap(), m.predict(i, j));
                }
            }
        }
    }
}
