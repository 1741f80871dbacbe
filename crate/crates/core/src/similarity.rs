//! Neighbourhood similarity indices for link prediction.
//!
//! The free functions evaluate one pair directly from the adjacency lists.
//! [`SimilarityIndex`] precomputes the common-neighbour count matrix once per
//! graph and serves the same values for bulk scoring; both paths perform the
//! same integer counts and the same floating point operations in the same
//! order, so they agree bit for bit.
//!
//! Conventions for degenerate neighbourhoods: a one-sided average over an
//! empty neighbourhood is 0 and a Jaccard coefficient of two empty sets is 0.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::graph::{InteractionGraph, NodeId};
use crate::math;
use crate::pairs::{Pair, PairScorer};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimilarityError {
    #[error("unknown similarity measure {0:?}")]
    UnknownMeasure(String),
    #[error("katz damping must lie in (0, 1), got {0}")]
    InvalidBeta(f64),
    #[error("katz walk length bound must be at least 1")]
    InvalidMaxLength,
    #[error("pair references node {id} but the graph has {count} nodes")]
    NodeOutOfRange { id: NodeId, count: usize },
}

/// The similarity measures this module implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Measure {
    CommonNeighbors,
    AvgCommonNeighbors,
    Jaccard,
    AvgJaccard,
    AdamicAdar,
    Katz,
    /// Interaction-profile fingerprint baseline.
    Ipf,
}

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::CommonNeighbors,
        Measure::AvgCommonNeighbors,
        Measure::Jaccard,
        Measure::AvgJaccard,
        Measure::AdamicAdar,
        Measure::Katz,
        Measure::Ipf,
    ];

    /// Short name used in configs, reports and feature columns.
    pub fn name(self) -> &'static str {
        match self {
            Measure::CommonNeighbors => "CN",
            Measure::AvgCommonNeighbors => "ACN",
            Measure::Jaccard => "Jaccard",
            Measure::AvgJaccard => "AJ",
            Measure::AdamicAdar => "AA",
            Measure::Katz => "Katz",
            Measure::Ipf => "IPF",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = SimilarityError;

    /// Case-insensitive match on the short name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| SimilarityError::UnknownMeasure(s.into()))
    }
}

/// Katz parameters. Only Katz reads them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityParams {
    pub katz_beta: f64,
    pub katz_max_len: usize,
}

impl Default for SimilarityParams {
    fn default() -> Self {
        SimilarityParams {
            katz_beta: 0.05,
            katz_max_len: 3,
        }
    }
}

impl SimilarityParams {
    pub fn validate(&self) -> Result<(), SimilarityError> {
        if !(self.katz_beta > 0.0 && self.katz_beta < 1.0) {
            return Err(SimilarityError::InvalidBeta(self.katz_beta));
        }
        if self.katz_max_len == 0 {
            return Err(SimilarityError::InvalidMaxLength);
        }
        Ok(())
    }
}

/// Scores of one measure over a pair list, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityScores {
    pub measure: Measure,
    pub scores: Vec<f64>,
}

fn intersection_size(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

#[inline]
fn jaccard_from_counts(common: usize, deg_a: usize, deg_b: usize) -> f64 {
    let union = deg_a + deg_b - common;
    if union == 0 {
        0.0
    } else {
        common as f64 / union as f64
    }
}

/// `|Γ(u) ∩ Γ(v)|`.
pub fn common_neighbors(g: &InteractionGraph, u: NodeId, v: NodeId) -> usize {
    intersection_size(g.neighbors(u), g.neighbors(v))
}

/// One-sided average: mean over `w ∈ Γ(v)` of `CN(w, u)`.
fn avg_common_neighbors_half(g: &InteractionGraph, u: NodeId, v: NodeId) -> f64 {
    let nb = g.neighbors(v);
    if nb.is_empty() {
        return 0.0;
    }
    let total: u64 = nb.iter().map(|&w| common_neighbors(g, w, u) as u64).sum();
    total as f64 / nb.len() as f64
}

/// Symmetrized average common neighbours.
pub fn avg_common_neighbors(g: &InteractionGraph, u: NodeId, v: NodeId) -> f64 {
    (avg_common_neighbors_half(g, u, v) + avg_common_neighbors_half(g, v, u)) / 2.0
}

pub fn jaccard(g: &InteractionGraph, u: NodeId, v: NodeId) -> f64 {
    jaccard_from_counts(common_neighbors(g, u, v), g.degree(u), g.degree(v))
}

fn avg_jaccard_half(g: &InteractionGraph, u: NodeId, v: NodeId) -> f64 {
    let nb = g.neighbors(v);
    if nb.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for &w in nb {
        total += jaccard(g, w, u);
    }
    total / nb.len() as f64
}

/// Symmetrized average Jaccard coefficient.
pub fn avg_jaccard(g: &InteractionGraph, u: NodeId, v: NodeId) -> f64 {
    (avg_jaccard_half(g, u, v) + avg_jaccard_half(g, v, u)) / 2.0
}

/// Adamic/Adar index with the natural logarithm.
pub fn adamic_adar(g: &InteractionGraph, u: NodeId, v: NodeId) -> f64 {
    let (a, b) = (g.neighbors(u), g.neighbors(v));
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                let degree = g.degree(a[i]);
                // a shared neighbour of two distinct nodes has degree >= 2
                if degree > 1 {
                    total += 1.0 / math::ln(degree as f64);
                }
                i += 1;
                j += 1;
            }
        }
    }
    total
}

/// Walk counts from `source` of every length `1..=max_len`; entry
/// `[len - 1][x]` counts walks of length `len` ending at `x`.
fn walk_counts_from(g: &InteractionGraph, source: NodeId, max_len: usize) -> Vec<Vec<u64>> {
    let m = g.node_count();
    let mut levels = Vec::with_capacity(max_len);
    let mut current = vec![0u64; m];
    for &w in g.neighbors(source) {
        current[w as usize] = 1;
    }
    levels.push(current);
    for _ in 1..max_len {
        let prev = levels.last().expect("at least one level");
        let mut next = vec![0u64; m];
        for (x, slot) in next.iter_mut().enumerate() {
            *slot = g
                .neighbors(x as NodeId)
                .iter()
                .fold(0u64, |acc, &w| acc.saturating_add(prev[w as usize]));
        }
        levels.push(next);
    }
    levels
}

/// Weighted walk sum: `Σ_{ℓ=1..b} β^ℓ · walks[ℓ-1]`, with `β^ℓ` built by
/// repeated multiplication and the sum accumulated from `ℓ = 1` upward.
pub fn katz_from_walks(walks: &[u64], beta: f64) -> f64 {
    let mut weight = 1.0;
    let mut total = 0.0;
    for &count in walks {
        weight *= beta;
        total += weight * count as f64;
    }
    total
}

/// Truncated Katz index over walks of length `1..=max_len`.
pub fn katz(g: &InteractionGraph, u: NodeId, v: NodeId, beta: f64, max_len: usize) -> f64 {
    let walks: Vec<u64> = walk_counts_from(g, u, max_len)
        .iter()
        .map(|level| level[v as usize])
        .collect();
    katz_from_walks(&walks, beta)
}

/// Profile fingerprint baseline: the best Jaccard match between one node and
/// the interaction partners of the other, taken over both directions.
pub fn ipf_baseline(g: &InteractionGraph, u: NodeId, v: NodeId) -> f64 {
    let side = |a: NodeId, b: NodeId| {
        g.neighbors(a)
            .iter()
            .filter(|&&w| w != b)
            .map(|&w| jaccard(g, w, b))
            .fold(0.0, f64::max)
    };
    f64::max(side(u, v), side(v, u))
}

/// Per-graph precomputation for bulk scoring.
///
/// Holds the dense `M × M` common-neighbour count matrix (the square of the
/// adjacency matrix), so memory grows as `4·M²` bytes.
#[derive(Debug, Clone)]
pub struct SimilarityIndex<'g> {
    graph: &'g InteractionGraph,
    common: Vec<u32>,
}

impl<'g> SimilarityIndex<'g> {
    pub fn new(graph: &'g InteractionGraph) -> Self {
        let m = graph.node_count();
        let mut common = vec![0u32; m * m];
        for u in 0..m {
            let row = &mut common[u * m..(u + 1) * m];
            for &w in graph.neighbors(u as NodeId) {
                for &x in graph.neighbors(w) {
                    row[x as usize] += 1;
                }
            }
        }
        SimilarityIndex { graph, common }
    }

    pub fn graph(&self) -> &'g InteractionGraph {
        self.graph
    }

    #[inline]
    pub fn common_neighbors(&self, u: NodeId, v: NodeId) -> usize {
        self.common[u as usize * self.graph.node_count() + v as usize] as usize
    }

    #[inline]
    fn jaccard(&self, u: NodeId, v: NodeId) -> f64 {
        jaccard_from_counts(self.common_neighbors(u, v), self.graph.degree(u), self.graph.degree(v))
    }

    /// Walks of length three from `u` to `v`: `Σ_{w ∈ Γ(v)} CN(w, u)`.
    fn walks3(&self, u: NodeId, v: NodeId) -> u64 {
        self.graph
            .neighbors(v)
            .iter()
            .map(|&w| self.common_neighbors(w, u) as u64)
            .sum()
    }

    fn acn_half(&self, u: NodeId, v: NodeId) -> f64 {
        let deg = self.graph.degree(v);
        if deg == 0 {
            return 0.0;
        }
        self.walks3(u, v) as f64 / deg as f64
    }

    fn aj_half(&self, u: NodeId, v: NodeId) -> f64 {
        let nb = self.graph.neighbors(v);
        if nb.is_empty() {
            return 0.0;
        }
        let mut total = 0.0;
        for &w in nb {
            total += self.jaccard(w, u);
        }
        total / nb.len() as f64
    }

    fn ipf(&self, u: NodeId, v: NodeId) -> f64 {
        let side = |a: NodeId, b: NodeId| {
            self.graph
                .neighbors(a)
                .iter()
                .filter(|&&w| w != b)
                .map(|&w| self.jaccard(w, b))
                .fold(0.0, f64::max)
        };
        f64::max(side(u, v), side(v, u))
    }

    fn katz(&self, u: NodeId, v: NodeId, params: &SimilarityParams) -> f64 {
        if params.katz_max_len <= 3 {
            let walks = [
                u64::from(self.graph.has_edge(u, v)),
                self.common_neighbors(u, v) as u64,
                self.walks3(u, v),
            ];
            katz_from_walks(&walks[..params.katz_max_len], params.katz_beta)
        } else {
            katz(self.graph, u, v, params.katz_beta, params.katz_max_len)
        }
    }

    /// Score of one pair under `measure`.
    pub fn score(&self, measure: Measure, pair: Pair, params: &SimilarityParams) -> f64 {
        let (u, v) = (pair.lo(), pair.hi());
        match measure {
            Measure::CommonNeighbors => self.common_neighbors(u, v) as f64,
            Measure::AvgCommonNeighbors => (self.acn_half(u, v) + self.acn_half(v, u)) / 2.0,
            Measure::Jaccard => self.jaccard(u, v),
            Measure::AvgJaccard => (self.aj_half(u, v) + self.aj_half(v, u)) / 2.0,
            Measure::AdamicAdar => adamic_adar(self.graph, u, v),
            Measure::Katz => self.katz(u, v, params),
            Measure::Ipf => self.ipf(u, v),
        }
    }

    /// Scores every pair, preserving order.
    pub fn score_all(
        &self,
        measure: Measure,
        pairs: &[Pair],
        params: &SimilarityParams,
    ) -> Result<SimilarityScores, SimilarityError> {
        params.validate()?;
        check_pairs(self.graph, pairs)?;
        let scores = pairs.iter().map(|&p| self.score(measure, p, params)).collect();
        Ok(SimilarityScores { measure, scores })
    }

    /// A [`PairScorer`] view for one measure.
    pub fn scorer(&self, measure: Measure, params: SimilarityParams) -> MeasureScorer<'_, 'g> {
        MeasureScorer {
            index: self,
            measure,
            params,
        }
    }
}

fn check_pairs(g: &InteractionGraph, pairs: &[Pair]) -> Result<(), SimilarityError> {
    let count = g.node_count();
    match pairs.iter().find(|p| p.hi() as usize >= count) {
        Some(p) => Err(SimilarityError::NodeOutOfRange { id: p.hi(), count }),
        None => Ok(()),
    }
}

/// Scores `pairs` under `measure`; builds a [`SimilarityIndex`] internally.
pub fn score_all(
    g: &InteractionGraph,
    measure: Measure,
    pairs: &[Pair],
    params: &SimilarityParams,
) -> Result<SimilarityScores, SimilarityError> {
    params.validate()?;
    check_pairs(g, pairs)?;
    SimilarityIndex::new(g).score_all(measure, pairs, params)
}

/// One measure of a [`SimilarityIndex`] as a [`PairScorer`].
#[derive(Debug, Clone, Copy)]
pub struct MeasureScorer<'a, 'g> {
    index: &'a SimilarityIndex<'g>,
    measure: Measure,
    params: SimilarityParams,
}

impl PairScorer for MeasureScorer<'_, '_> {
    fn node_count(&self) -> usize {
        self.index.graph.node_count()
    }

    fn score(&self, pair: Pair) -> f64 {
        self.index.score(self.measure, pair, &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;

    /// Nodes A,B,C,D with edges A–B, A–C, B–C, C–D.
    fn g1() -> InteractionGraph {
        parse_edge_list("A,B\nA,C\nB,C\nC,D\n", ',').unwrap()
    }

    const A: NodeId = 0;
    const B: NodeId = 1;
    const D: NodeId = 3;

    #[test]
    fn common_neighbors_on_g1() {
        let g = g1();
        assert_eq!(common_neighbors(&g, A, B), 1);
        assert_eq!(common_neighbors(&g, A, D), 1);
    }

    #[test]
    fn isolated_node_scores_zero() {
        let base = g1();
        let mut names = base.names().to_vec();
        names.push("E".into());
        let g = InteractionGraph::from_edges(names, base.edges().map(|p| (p.lo(), p.hi()))).unwrap();
        let e = 4;
        for m in Measure::ALL {
            assert_eq!(SimilarityIndex::new(&g).score(m, Pair::new(A, e), &SimilarityParams::default()), 0.0, "{m}");
        }
        assert_eq!(common_neighbors(&g, A, e), 0);
        assert_eq!(avg_common_neighbors(&g, e, A) , avg_common_neighbors(&g, A, e));
        assert_eq!(jaccard(&g, e, e), 0.0);
    }

    #[test]
    fn acn_on_g1() {
        let g = g1();
        assert_eq!(avg_common_neighbors(&g, A, D), 0.75);
        assert_eq!(avg_common_neighbors(&g, D, A), 0.75);
    }

    #[test]
    fn jaccard_on_g1() {
        let g = g1();
        assert_eq!(jaccard(&g, A, B), 1.0 / 3.0);
        assert_eq!(jaccard(&g, A, D), 0.5);
    }

    #[test]
    fn adamic_adar_on_g1() {
        let g = g1();
        assert!((adamic_adar(&g, A, D) - 0.910_239_226_626_837).abs() < 1e-12);
        let path = parse_edge_list("x,y\ny,z\n", ',').unwrap();
        assert_eq!(adamic_adar(&path, 0, 2), 1.0 / core::f64::consts::LN_2);
        assert_eq!(adamic_adar(&path, 0, 1), 0.0);
    }

    #[test]
    fn katz_on_g1() {
        let g = g1();
        assert!((katz(&g, A, D, 0.1, 3) - 0.011).abs() < 1e-15);
        assert_eq!(katz(&g, A, B, 0.1, 1), 0.1);
        assert_eq!(katz(&g, A, D, 0.1, 1), 0.0);
    }

    #[test]
    fn katz_short_walks_dominate_for_small_beta() {
        // 0-1-2 at distance two, 0-3-4-5 reaching 5 only at distance three
        let g = parse_edge_list("0,1\n1,2\n0,3\n3,4\n4,5\n", ',').unwrap();
        let id = |n: &str| g.id_of(n).unwrap();
        let beta = 0.01;
        assert!(katz(&g, id("0"), id("2"), beta, 3) > katz(&g, id("0"), id("5"), beta, 3));
    }

    #[test]
    fn ipf_on_g1() {
        let g = g1();
        assert_eq!(ipf_baseline(&g, A, D), 0.5);
        assert_eq!(ipf_baseline(&g, D, A), 0.5);
    }

    #[test]
    fn index_matches_direct_on_g1() {
        let g = g1();
        let index = SimilarityIndex::new(&g);
        let params = SimilarityParams { katz_beta: 0.1, katz_max_len: 3 };
        let p = Pair::new(A, D);
        assert_eq!(index.score(Measure::AvgCommonNeighbors, p, &params), 0.75);
        assert_eq!(index.score(Measure::Ipf, p, &params), 0.5);
        assert_eq!(index.score(Measure::Katz, p, &params), katz(&g, A, D, 0.1, 3));
        let long = SimilarityParams { katz_beta: 0.1, katz_max_len: 5 };
        assert_eq!(index.score(Measure::Katz, p, &long), katz(&g, A, D, 0.1, 5));
    }

    #[test]
    fn score_all_contract() {
        let g = g1();
        let params = SimilarityParams::default();
        assert!(score_all(&g, Measure::Katz, &[], &params).unwrap().scores.is_empty());
        let pairs = [Pair::new(A, D), Pair::new(B, D), Pair::new(A, D)];
        let cn = score_all(&g, Measure::CommonNeighbors, &pairs, &params).unwrap();
        assert_eq!(cn.scores[0], cn.scores[2]);
        for (p, s) in pairs.iter().zip(&cn.scores) {
            assert_eq!(*s, common_neighbors(&g, p.lo(), p.hi()) as f64);
        }
        assert!(matches!(
            score_all(&g, Measure::CommonNeighbors, &[Pair::new(0, 9)], &params),
            Err(SimilarityError::NodeOutOfRange { id: 9, .. })
        ));
        let bad = SimilarityParams { katz_beta: 1.0, katz_max_len: 3 };
        assert!(matches!(score_all(&g, Measure::Katz, &pairs, &bad), Err(SimilarityError::InvalidBeta(_))));
    }

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
        assert_eq!("acn".parse::<Measure>().unwrap(), Measure::AvgCommonNeighbors);
        assert!(matches!("shortest-path".parse::<Measure>(), Err(SimilarityError::UnknownMeasure(_))));
    }
}
