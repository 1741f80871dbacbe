//! Unordered node pairs and the scored/labeled pair lists built from them.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::graph::NodeId;
use crate::metrics::MetricsError;

/// An unordered pair of distinct nodes, stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    lo: NodeId,
    hi: NodeId,
}

impl Pair {
    /// Builds the unordered pair `{a, b}`.
    pub fn new(a: NodeId, b: NodeId) -> Self {
        debug_assert_ne!(a, b, "a pair needs two distinct nodes");
        if a <= b {
            Pair { lo: a, hi: b }
        } else {
            Pair { lo: b, hi: a }
        }
    }

    pub fn lo(self) -> NodeId {
        self.lo
    }

    pub fn hi(self) -> NodeId {
        self.hi
    }

    pub fn contains(self, node: NodeId) -> bool {
        self.lo == node || self.hi == node
    }

    /// The endpoint that is not `node`.
    pub fn other(self, node: NodeId) -> NodeId {
        if self.lo == node {
            self.hi
        } else {
            self.lo
        }
    }
}

pub type PairSet = BTreeSet<Pair>;

/// Anything that assigns a score to a node pair.
///
/// Implemented by similarity indices and factorization models so that the
/// ensemble and the harness can treat every predictor the same way.
pub trait PairScorer: Sync {
    /// Number of nodes the scorer knows about; pairs must reference ids below it.
    fn node_count(&self) -> usize;

    fn score(&self, pair: Pair) -> f64;
}

/// Labeled candidate pairs waiting for scores.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateSet {
    pub pairs: Vec<Pair>,
    pub labels: Vec<bool>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    /// Attaches `scores` (one per pair, in order).
    pub fn with_scores(&self, scores: Vec<f64>) -> Result<ScoredPairs, MetricsError> {
        ScoredPairs::new(self.pairs.clone(), scores, self.labels.clone())
    }
}

/// Candidate pairs with a score and a binary label each.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPairs {
    pairs: Vec<Pair>,
    scores: Vec<f64>,
    labels: Vec<bool>,
}

impl ScoredPairs {
    /// Checks equal lengths, finite scores and pair uniqueness.
    pub fn new(pairs: Vec<Pair>, scores: Vec<f64>, labels: Vec<bool>) -> Result<Self, MetricsError> {
        if pairs.len() != scores.len() || pairs.len() != labels.len() {
            return Err(MetricsError::LengthMismatch {
                pairs: pairs.len(),
                scores: scores.len(),
                labels: labels.len(),
            });
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(MetricsError::NonFiniteScore(i));
        }
        let mut sorted = pairs.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(MetricsError::DuplicatePair(w[0]));
        }
        Ok(ScoredPairs { pairs, scores, labels })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn negatives(&self) -> usize {
        self.len() - self.positives()
    }

    /// Indices ordered by score descending, then pair ascending.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_unstable_by(|&a, &b| {
            self.scores[b]
                .total_cmp(&self.scores[a])
                .then_with(|| self.pairs[a].cmp(&self.pairs[b]))
        });
        order
    }
}
