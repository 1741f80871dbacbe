use alloc::vec::Vec;

use rand::Rng as _;

use super::AmfError;
use crate::graph::{InteractionGraph, NodeId};
use crate::pairs::{Pair, PairSet};
use crate::seed::Rng;

/// Below this fraction of available pairs, rejection sampling is replaced by
/// drawing from an explicit list of the available pairs.
const REJECTION_MIN_DENSITY: f64 = 0.25;

/// Uniform sampler over the non-edges of a graph, optionally skipping a set
/// of reserved pairs (held-out evaluation pairs, for instance).
#[derive(Debug, Clone)]
pub struct NegativeSampler<'a> {
    graph: &'a InteractionGraph,
    reserved: Option<&'a PairSet>,
    pool: Option<Vec<Pair>>,
}

impl<'a> NegativeSampler<'a> {
    pub fn new(graph: &'a InteractionGraph, reserved: Option<&'a PairSet>) -> Result<Self, AmfError> {
        let total = graph.pair_count();
        let reserved_non_edges = reserved.map_or(0, |set| {
            set.iter()
                .filter(|p| (p.hi() as usize) < graph.node_count() && !graph.contains(**p))
                .count()
        });
        let available = graph.non_edge_count() - reserved_non_edges;
        if available == 0 {
            return Err(AmfError::NoNegatives);
        }
        let pool = if (available as f64) < REJECTION_MIN_DENSITY * total as f64 {
            let mut pool = Vec::with_capacity(available);
            let m = graph.node_count() as NodeId;
            for u in 0..m {
                for v in (u + 1)..m {
                    let p = Pair::new(u, v);
                    if !graph.has_edge(u, v) && !reserved.is_some_and(|r| r.contains(&p)) {
                        pool.push(p);
                    }
                }
            }
            Some(pool)
        } else {
            None
        };
        Ok(NegativeSampler { graph, reserved, pool })
    }

    fn accepts(&self, p: Pair) -> bool {
        !self.graph.contains(p) && !self.reserved.is_some_and(|r| r.contains(&p))
    }

    /// One uniformly drawn available pair.
    pub fn draw(&self, rng: &mut Rng) -> Pair {
        if let Some(pool) = &self.pool {
            return pool[rng.random_range(0..pool.len())];
        }
        let m = self.graph.node_count() as NodeId;
        loop {
            let a = rng.random_range(0..m);
            let mut b = rng.random_range(0..m - 1);
            if b >= a {
                b += 1;
            }
            let p = Pair::new(a, b);
            if self.accepts(p) {
                return p;
            }
        }
    }

    /// `count` independent draws; repeats are possible.
    pub fn sample(&self, count: usize, rng: &mut Rng) -> Vec<Pair> {
        (0..count).map(|_| self.draw(rng)).collect()
    }
}

/// Draws `count` uniform non-edges of `g`.
pub fn sample_negatives(g: &InteractionGraph, count: usize, rng: &mut Rng) -> Result<Vec<Pair>, AmfError> {
    Ok(NegativeSampler::new(g, None)?.sample(count, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;
    use crate::seed;
    use alloc::collections::BTreeMap;

    #[test]
    fn never_returns_edges() {
        let g = parse_edge_list("a,b\nb,c\nc,d\nd,a\na,c\n", ',').unwrap();
        let mut rng = seed::rng(5, 0);
        let negs = sample_negatives(&g, 500, &mut rng).unwrap();
        assert_eq!(negs.len(), 500);
        assert!(negs.iter().all(|p| !g.contains(*p) && p.lo() != p.hi()));
        assert!(negs.iter().all(|p| *p == Pair::new(1, 3)));
    }

    #[test]
    fn complete_graph_has_no_negatives() {
        let g = parse_edge_list("a,b\nb,c\na,c\n", ',').unwrap();
        assert_eq!(sample_negatives(&g, 1, &mut seed::rng(0, 0)), Err(AmfError::NoNegatives));
    }

    #[test]
    fn reserved_pairs_are_skipped() {
        let g = parse_edge_list("a,b\nc,d\n", ',').unwrap();
        let reserved: PairSet = [Pair::new(0, 2), Pair::new(0, 3)].into_iter().collect();
        let sampler = NegativeSampler::new(&g, Some(&reserved)).unwrap();
        let mut rng = seed::rng(1, 0);
        for p in sampler.sample(300, &mut rng) {
            assert!(!reserved.contains(&p) && !g.contains(p));
        }
        let all: PairSet = [(0, 2), (0, 3), (1, 2), (1, 3)].into_iter().map(|(a, b)| Pair::new(a, b)).collect();
        assert!(matches!(NegativeSampler::new(&g, Some(&all)), Err(AmfError::NoNegatives)));
    }

    /// Chi-square style check: every non-edge of a 6-node graph is drawn
    /// within five standard deviations of its expected frequency.
    #[test]
    fn draws_are_uniform() {
        let g = parse_edge_list("0,1\n1,2\n2,3\n3,4\n4,5\n0,5\n", ',').unwrap();
        let non_edges = g.non_edge_count();
        assert_eq!(non_edges, 9);
        for sparse_pool in [false, true] {
            let mut sampler = NegativeSampler::new(&g, None).unwrap();
            if sparse_pool {
                // exercise the explicit pool path on the same graph
                let pool: Vec<Pair> = (0..6u32)
                    .flat_map(|u| ((u + 1)..6).map(move |v| Pair::new(u, v)))
                    .filter(|p| !g.contains(*p))
                    .collect();
                sampler.pool = Some(pool);
            }
            let draws = 100_000;
            let mut counts: BTreeMap<Pair, usize> = BTreeMap::new();
            let mut rng = seed::rng(42, sparse_pool as u64);
            for p in sampler.sample(draws, &mut rng) {
                *counts.entry(p).or_default() += 1;
            }
            assert_eq!(counts.len(), non_edges);
            let p = 1.0 / non_edges as f64;
            let expected = draws as f64 * p;
            let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
            let mut chi2 = 0.0;
            for &c in counts.values() {
                assert!((c as f64 - expected).abs() < 5.0 * sigma, "count {c} vs {expected}");
                chi2 += (c as f64 - expected).powi(2) / expected;
            }
            // 8 degrees of freedom; 26.12 is the 0.999 quantile
            assert!(chi2 < 26.12, "chi2 = {chi2}");
        }
    }
}
