#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use linkpred::config::{ExperimentConfig, Protocol};
use linkpred::io::write_edge_list;
use linkpred_core::seed;
use linkpred_core::{InteractionGraph, NodeId, Pair};
use rand::seq::SliceRandom;
use rand::Rng;
use tempfile::TempDir;

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("D{i:03}")).collect()
}

/// Two equal blocks; pairs inside a block link with `p_in`, across with `p_out`.
pub fn planted(half: usize, p_in: f64, p_out: f64, s: u64) -> InteractionGraph {
    let mut rng = seed::rng(s, 0);
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

/// Three nested releases of one planted graph (70%, 85% and all of its
/// edges) written as edge lists, plus the full graph.
pub struct Releases {
    pub dir: TempDir,
    pub t0: PathBuf,
    pub t1: PathBuf,
    pub t2: PathBuf,
    pub full: InteractionGraph,
}

pub fn release_chain(half: usize, s: u64) -> Releases {
    let full = planted(half, 0.5, 0.04, s);
    let mut edges: Vec<Pair> = full.edges().collect();
    edges.shuffle(&mut seed::rng(s, 1));
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for (name, share) in [("t0.csv", 0.7), ("t1.csv", 0.85), ("t2.csv", 1.0)] {
        let keep = (edges.len() as f64 * share) as usize;
        let g = full.with_edges(edges[..keep].iter().copied());
        let path = dir.path().join(name);
        write_edge_list(&path, &g, ',').unwrap();
        paths.push(path);
    }
    let t2 = paths.pop().unwrap();
    let t1 = paths.pop().unwrap();
    let t0 = paths.pop().unwrap();
    Releases { dir, t0, t1, t2, full }
}

/// Small, fast settings for protocol runs on toy graphs.
pub const FAST: &str = "\
k = 16
dropout = 0.3
learning_rate = 0.02
epochs = 40
batch_size = 64
alpha_grid = 0, 0.5, 1
search_draws = 2
search_rounds = 20
search_min_child_weight = 0.5
bootstrap_resamples = 50
repeats = 2
folds = 3
curve_points = 50
";

/// `FAST` settings for `protocol` on `releases`, writing to `out`.
pub fn fast_config(protocol: Protocol, releases: &Releases, out: &Path, extra: &[(&str, &str)]) -> ExperimentConfig {
    let mut text = format!("protocol = {}\nout_dir = {}\n", protocol.name(), out.display());
    match protocol {
        Protocol::Retrospective => {
            text += &format!(
                "train = {}\nvalidation = {}\ntest = {}\n",
                releases.t0.display(),
                releases.t1.display(),
                releases.t2.display()
            );
        }
        _ => text += &format!("graph = {}\n", releases.t2.display()),
    }
    text += FAST;
    let overrides: Vec<(String, String)> = extra.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    ExperimentConfig::from_text(&text, &overrides).unwrap()
}

/// Every file under `dir` as `(relative path, bytes)`, sorted by path.
pub fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
