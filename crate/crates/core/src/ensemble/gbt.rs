//! Newton-boosted regression trees on the logistic loss.
//!
//! Trees are grown level by level with exact greedy split search. Every
//! feature is sorted once up front; each level then needs a single pass per
//! feature over the sorted rows to score every candidate threshold of every
//! open node.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use super::{EnsembleError, FeatureMatrix};
use crate::math;
use crate::seed;

/// Splits must improve the objective by more than this.
const MIN_SPLIT_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbtParams {
    pub rounds: usize,
    pub max_depth: usize,
    /// Shrinkage applied to every tree output.
    pub learning_rate: f64,
    /// Minimum hessian sum on each side of a split.
    pub min_child_weight: f64,
    /// Fraction of rows drawn (without replacement, per row) for each tree.
    pub subsample: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    /// Minimum loss reduction to split.
    pub gamma: f64,
    pub seed: u64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            rounds: 200,
            max_depth: 3,
            learning_rate: 0.1,
            min_child_weight: 1.0,
            subsample: 1.0,
            lambda: 1.0,
            gamma: 0.0,
            seed: 0,
        }
    }
}

impl GbtParams {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(EnsembleError::InvalidParams("learning rate must be positive"));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(EnsembleError::InvalidParams("subsample must lie in (0, 1]"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(EnsembleError::InvalidParams("lambda must be non-negative"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(EnsembleError::InvalidParams("gamma must be non-negative"));
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return Err(EnsembleError::InvalidParams("min child weight must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(f64),
}

/// A regression tree stored as a node array rooted at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn leaf(weight: f64) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf(weight)],
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match nodes[at] {
                TreeNode::Leaf(_) => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Leaf(w) => Some(*w),
            TreeNode::Split { .. } => None,
        })
    }

    pub fn eval(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf(w) => return w,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// Additive tree model: `σ(base_score + shrinkage · Σ tree(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel {
    columns: Vec<String>,
    trees: Vec<Tree>,
    shrinkage: f64,
    base_score: f64,
}

impl GbtModel {
    /// A model without trees.
    pub fn new(columns: Vec<String>, base_score: f64, shrinkage: f64) -> Self {
        GbtModel {
            columns,
            trees: Vec::new(),
            shrinkage,
            base_score,
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn push_tree(&mut self, tree: Tree) {
        self.trees.push(tree);
    }

    pub fn shrinkage(&self) -> f64 {
        self.shrinkage
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    /// Raw score for a row laid out in training column order.
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.base_score + self.shrinkage * self.trees.iter().map(|t| t.eval(row)).sum::<f64>()
    }

    /// Probabilities for every row; columns are matched by name.
    pub fn predict(&self, features: &FeatureMatrix) -> Result<Vec<f64>, EnsembleError> {
        let index = self
            .columns
            .iter()
            .map(|c| {
                features
                    .columns()
                    .iter()
                    .position(|f| f == c)
                    .ok_or_else(|| EnsembleError::MissingColumn(c.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut row = vec![0.0; index.len()];
        Ok((0..features.rows())
            .map(|r| {
                for (dst, &c) in row.iter_mut().zip(&index) {
                    *dst = features.value(r, c);
                }
                math::sigmoid(self.margin(&row))
            })
            .collect())
    }
}

/// Probabilities of `model` on `features`.
pub fn gbt_predict(model: &GbtModel, features: &FeatureMatrix) -> Result<Vec<f64>, EnsembleError> {
    model.predict(features)
}

pub fn gbt_train(features: &FeatureMatrix, params: &GbtParams) -> Result<GbtModel, EnsembleError> {
    gbt_train_with_history(features, params).map(|(m, _)| m)
}

/// Trains and also returns the mean logistic training loss before the first
/// round and after every round (`rounds + 1` values).
pub fn gbt_train_with_history(
    features: &FeatureMatrix,
    params: &GbtParams,
) -> Result<(GbtModel, Vec<f64>), EnsembleError> {
    params.validate()?;
    let labels = features.labels().ok_or(EnsembleError::MissingLabels)?;
    let n = features.rows();
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == n {
        return Err(EnsembleError::SingleClass);
    }
    let base_score = math::logit(positives as f64 / n as f64);
    let mut model = GbtModel::new(features.columns().to_vec(), base_score, params.learning_rate);
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
    let mut margins = vec![base_score; n];
    let mut history = Vec::with_capacity(params.rounds + 1);
    history.push(mean_log_loss(&margins, &y));

    let grower = Grower::new(features, params);
    let mut rng = seed::rng(params.seed, 0);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut in_sample = vec![true; n];
    for _ in 0..params.rounds {
        for r in 0..n {
            let p = math::sigmoid(margins[r]);
            grad[r] = p - y[r];
            hess[r] = p * (1.0 - p);
        }
        if params.subsample < 1.0 {
            for s in in_sample.iter_mut() {
                *s = rng.random::<f64>() < params.subsample;
            }
        }
        let tree = grower.grow(&grad, &hess, &in_sample);
        for (r, m) in margins.iter_mut().enumerate() {
            *m += params.learning_rate * tree.eval(features.row(r));
        }
        model.push_tree(tree);
        history.push(mean_log_loss(&margins, &y));
    }
    Ok((model, history))
}

fn mean_log_loss(margins: &[f64], y: &[f64]) -> f64 {
    // -[y ln σ(m) + (1-y) ln(1-σ(m))] = softplus(m) - y·m
    let total: f64 = margins
        .iter()
        .zip(y)
        .map(|(&m, &y)| m.max(0.0) + libm::log1p(math::exp(-m.abs())) - y * m)
        .sum();
    total / margins.len() as f64
}

struct Grower<'a> {
    x: &'a FeatureMatrix,
    params: &'a GbtParams,
    /// Row indices sorted by each feature value.
    sorted: Vec<Vec<usize>>,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Per-node scan state while sweeping one feature.
#[derive(Clone, Copy)]
struct Sweep {
    g_left: f64,
    h_left: f64,
    last: f64,
    seen: bool,
}

impl<'a> Grower<'a> {
    fn new(x: &'a FeatureMatrix, params: &'a GbtParams) -> Self {
        let sorted = (0..x.columns().len())
            .map(|c| {
                let mut order: Vec<usize> = (0..x.rows()).collect();
                order.sort_by(|&a, &b| x.value(a, c).total_cmp(&x.value(b, c)).then(a.cmp(&b)));
                order
            })
            .collect();
        Grower { x, params, sorted }
    }

    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.params.lambda)
    }

    fn leaf_weight(&self, g: f64, h: f64) -> f64 {
        let w = -g / (h + self.params.lambda);
        if w.is_finite() {
            w
        } else {
            0.0
        }
    }

    fn grow(&self, grad: &[f64], hess: &[f64], in_sample: &[bool]) -> Tree {
        const NONE: usize = usize::MAX;
        let n = grad.len();
        // node index of each sampled row, NONE once its node is final
        let mut node_of: Vec<usize> = (0..n).map(|r| if in_sample[r] { 0 } else { NONE }).collect();
        let (g0, h0) = (0..n)
            .filter(|&r| in_sample[r])
            .fold((0.0, 0.0), |(g, h), r| (g + grad[r], h + hess[r]));
        let mut nodes = vec![TreeNode::Leaf(self.leaf_weight(g0, h0))];
        // (node, G, H) of the nodes open at this level
        let mut open = vec![(0usize, g0, h0)];
        // node id -> slot in `open`
        let mut slot = vec![NONE; 1];

        for _depth in 0..self.params.max_depth {
            if open.is_empty() {
                break;
            }
            slot.resize(nodes.len(), NONE);
            slot.fill(NONE);
            for (i, &(id, _, _)) in open.iter().enumerate() {
                slot[id] = i;
            }
            let mut best: Vec<Option<Candidate>> = vec![None; open.len()];
            let mut sweep = vec![
                Sweep {
                    g_left: 0.0,
                    h_left: 0.0,
                    last: 0.0,
                    seen: false
                };
                open.len()
            ];
            for (feature, order) in self.sorted.iter().enumerate() {
                sweep.iter_mut().for_each(|s| *s = Sweep { g_left: 0.0, h_left: 0.0, last: 0.0, seen: false });
                for &r in order {
                    let id = node_of[r];
                    if id == NONE {
                        continue;
                    }
                    let i = slot[id];
                    let (_, g, h) = open[i];
                    let v = self.x.value(r, feature);
                    let s = &mut sweep[i];
                    if s.seen && v > s.last {
                        let (gl, hl) = (s.g_left, s.h_left);
                        let (gr, hr) = (g - gl, h - hl);
                        if hl >= self.params.min_child_weight && hr >= self.params.min_child_weight {
                            let gain = 0.5 * (self.score(gl, hl) + self.score(gr, hr) - self.score(g, h)) - self.params.gamma;
                            if gain > MIN_SPLIT_GAIN && best[i].map_or(true, |b| gain > b.gain) {
                                let mid = s.last + (v - s.last) / 2.0;
                                let threshold = if mid >= s.last && mid < v { mid } else { s.last };
                                best[i] = Some(Candidate {
                                    gain,
                                    feature,
                                    threshold,
                                });
                            }
                        }
                    }
                    s.g_left += grad[r];
                    s.h_left += hess[r];
                    s.last = v;
                    s.seen = true;
                }
            }

            // child id, G, H; accumulated in row order for determinism
            let mut children: Vec<(usize, usize)> = vec![(NONE, NONE); open.len()];
            for (i, cand) in best.iter().enumerate() {
                if let Some(c) = cand {
                    let left = nodes.len();
                    nodes.push(TreeNode::Leaf(0.0));
                    nodes.push(TreeNode::Leaf(0.0));
                    nodes[open[i].0] = TreeNode::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left,
                        right: left + 1,
                    };
                    children[i] = (left, left + 1);
                }
            }
            let mut stats = vec![(0.0, 0.0); nodes.len()];
            for r in 0..n {
                let id = node_of[r];
                if id == NONE {
                    continue;
                }
                let i = slot[id];
                match best[i] {
                    None => node_of[r] = NONE,
                    Some(c) => {
                        let (l, rt) = children[i];
                        let child = if self.x.value(r, c.feature) <= c.threshold { l } else { rt };
                        node_of[r] = child;
                        stats[child].0 += grad[r];
                        stats[child].1 += hess[r];
                    }
                }
            }
            open.clear();
            for &(l, r) in &children {
                if l == NONE {
                    continue;
                }
                for id in [l, r] {
                    let (g, h) = stats[id];
                    nodes[id] = TreeNode::Leaf(self.leaf_weight(g, h));
                    open.push((id, g, h));
                }
            }
        }
        Tree { nodes }
    }
}
