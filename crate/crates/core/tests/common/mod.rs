#![allow(dead_code)]

use linkpred_core::{InteractionGraph, NodeId};
use proptest::prelude::*;

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i}")).collect()
}

/// Graph on `n` nodes whose edges are the set flags of `mask`, one flag per
/// unordered pair in (0,1), (0,2), ..., (n-2,n-1) order.
pub fn graph_from_mask(n: usize, mask: &[bool]) -> InteractionGraph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for u in 0..n as NodeId {
        for v in (u + 1)..n as NodeId {
            if mask[bit] {
                edges.push((u, v));
            }
            bit += 1;
        }
    }
    InteractionGraph::from_edges(names(n), edges).unwrap()
}

/// Random graphs with 2 to `max_nodes` nodes.
pub fn arb_graph(max_nodes: usize) -> impl Strategy<Value = InteractionGraph> {
    (2..=max_nodes).prop_flat_map(|n| {
        prop::collection::vec(prop::bool::weighted(0.35), n * (n - 1) / 2).prop_map(move |mask| graph_from_mask(n, &mask))
    })
}
