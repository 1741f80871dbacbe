//! Immutable undirected interaction graphs.
//!
//! Nodes carry external string names and dense ids `0..M` assigned in order of
//! first appearance. Neighbour lists are sorted and duplicate free, which keeps
//! pairwise intersections linear in the two degrees.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use crate::pairs::{CandidateSet, Pair, PairSet};

/// Dense node identifier, `0..node_count`.
pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: expected two node names separated by {delimiter:?}")]
    Malformed { line: usize, delimiter: char },
    #[error("line {line}: self-loop on node {name:?}")]
    SelfLoop { line: usize, name: String },
    #[error("edge list contains no edges")]
    Empty,
    #[error("self-loop on node id {0}")]
    SelfLoopId(NodeId),
    #[error("node id {id} out of range for a graph with {count} nodes")]
    NodeOutOfRange { id: NodeId, count: usize },
    #[error("duplicate node name {0:?}")]
    DuplicateName(String),
    #[error("the two releases share no nodes")]
    EmptyIntersection,
}

/// An undirected simple graph over named nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    names: Vec<String>,
    index: BTreeMap<String, NodeId>,
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl InteractionGraph {
    /// Builds a graph over `names` (id = position) from an edge iterator.
    ///
    /// Reversed and repeated edges collapse to one; self-loops are rejected.
    pub fn from_edges<I>(names: Vec<String>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let count = names.len();
        let mut index = BTreeMap::new();
        for (id, name) in names.iter().enumerate() {
            if index.insert(name.clone(), id as NodeId).is_some() {
                return Err(GraphError::DuplicateName(name.clone()));
            }
        }
        let mut adjacency = alloc::vec![Vec::new(); count];
        for (a, b) in edges {
            for id in [a, b] {
                if id as usize >= count {
                    return Err(GraphError::NodeOutOfRange { id, count });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoopId(a));
            }
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        let mut degree_sum = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            degree_sum += list.len();
        }
        Ok(InteractionGraph {
            names,
            index,
            adjacency,
            edge_count: degree_sum / 2,
        })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id as usize]
    }

    pub fn id_of(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    /// Sorted neighbour list of `id`.
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.adjacency[id as usize]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adjacency[id as usize].len()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency[a as usize].binary_search(&b).is_ok()
    }

    pub fn contains(&self, pair: Pair) -> bool {
        self.has_edge(pair.lo(), pair.hi())
    }

    /// Number of unordered node pairs, `M(M-1)/2`.
    pub fn pair_count(&self) -> usize {
        let m = self.node_count();
        m * m.saturating_sub(1) / 2
    }

    pub fn non_edge_count(&self) -> usize {
        self.pair_count() - self.edge_count
    }

    /// Edges in ascending pair order.
    pub fn edges(&self) -> impl Iterator<Item = Pair> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = u as NodeId;
            list.iter().filter(move |&&v| v > u).map(move |&v| Pair::new(u, v))
        })
    }

    /// A graph over the same nodes containing only `edges`.
    pub fn with_edges<I>(&self, edges: I) -> Self
    where
        I: IntoIterator<Item = Pair>,
    {
        Self::from_edges(self.names.clone(), edges.into_iter().map(|p| (p.lo(), p.hi())))
            .expect("pairs of an existing graph are valid edges")
    }

    /// Restricts the graph to `keep` (names, in the given order), dropping
    /// edges with a removed endpoint. Names absent from the graph become
    /// isolated nodes.
    pub fn restrict_to(&self, keep: &[String]) -> Result<Self, GraphError> {
        let remap: Vec<Option<NodeId>> = {
            let mut remap = alloc::vec![None; self.node_count()];
            for (new_id, name) in keep.iter().enumerate() {
                if let Some(old) = self.id_of(name) {
                    remap[old as usize] = Some(new_id as NodeId);
                }
            }
            remap
        };
        let edges = self.edges().filter_map(|p| {
            Some((remap[p.lo() as usize]?, remap[p.hi() as usize]?))
        });
        Self::from_edges(keep.to_vec(), edges)
    }

    /// Serializes to edge-list text, one `a<delimiter>b` line per edge.
    pub fn to_edge_list(&self, delimiter: char) -> String {
        let mut out = String::new();
        for p in self.edges() {
            let _ = writeln!(out, "{}{}{}", self.name(p.lo()), delimiter, self.name(p.hi()));
        }
        out
    }
}

/// Incremental graph construction from named edges.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    names: Vec<String>,
    index: BTreeMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Id of `name`, assigning the next dense id on first sight.
    pub fn intern(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as NodeId;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn add_edge(&mut self, a: &str, b: &str) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoopId(self.intern(a)));
        }
        let (a, b) = (self.intern(a), self.intern(b));
        self.edges.push((a, b));
        Ok(())
    }

    pub fn build(self) -> InteractionGraph {
        InteractionGraph::from_edges(self.names, self.edges)
            .expect("builder only records valid edges")
    }
}

/// Splits one edge-list line into its two node names.
///
/// Returns `Ok(None)` for blank and `#` comment lines.
pub fn parse_edge_line(line: &str, delimiter: char, line_no: usize) -> Result<Option<(&str, &str)>, GraphError> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut tokens = trimmed.split(delimiter).map(str::trim);
    match (tokens.next(), tokens.next(), tokens.next()) {
        (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
            if a == b {
                return Err(GraphError::SelfLoop {
                    line: line_no,
                    name: a.to_string(),
                });
            }
            Ok(Some((a, b)))
        }
        _ => Err(GraphError::Malformed {
            line: line_no,
            delimiter,
        }),
    }
}

/// Parses edge-list text into a graph. Line numbers in errors are 1-based.
pub fn parse_edge_list(text: &str, delimiter: char) -> Result<InteractionGraph, GraphError> {
    let mut builder = GraphBuilder::new();
    for (i, line) in text.lines().enumerate() {
        if let Some((a, b)) = parse_edge_line(line, delimiter, i + 1)? {
            builder.add_edge(a, b)?;
        }
    }
    if builder.edges.is_empty() {
        return Err(GraphError::Empty);
    }
    Ok(builder.build())
}

/// Two releases of the same interaction graph over a common node set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleasePair {
    pub train: InteractionGraph,
    pub test: InteractionGraph,
}

impl ReleasePair {
    /// Names of the shared nodes, indexed by the common id space.
    pub fn shared_nodes(&self) -> &[String] {
        self.train.names()
    }
}

/// Restricts both releases to the nodes they share.
///
/// Shared nodes keep the relative order they have in `train`, so aligning an
/// already aligned pair is the identity.
pub fn align_releases(train: &InteractionGraph, test: &InteractionGraph) -> Result<ReleasePair, GraphError> {
    let shared: Vec<String> = train
        .names()
        .iter()
        .filter(|name| test.id_of(name).is_some())
        .cloned()
        .collect();
    if shared.is_empty() {
        return Err(GraphError::EmptyIntersection);
    }
    Ok(ReleasePair {
        train: train.restrict_to(&shared)?,
        test: test.restrict_to(&shared)?,
    })
}

/// Every unordered pair that is not a training edge and not excluded, labeled
/// by membership in the test release. Pairs come out in ascending order.
pub fn candidate_pairs(pair: &ReleasePair, exclusions: &PairSet) -> CandidateSet {
    let m = pair.train.node_count() as NodeId;
    let mut out = CandidateSet::default();
    for u in 0..m {
        let train_nb = pair.train.neighbors(u);
        let test_nb = pair.test.neighbors(u);
        for v in (u + 1)..m {
            if train_nb.binary_search(&v).is_ok() {
                continue;
            }
            let p = Pair::new(u, v);
            if exclusions.contains(&p) {
                continue;
            }
            out.pairs.push(p);
            out.labels.push(test_nb.binary_search(&v).is_ok());
        }
    }
    out
}
