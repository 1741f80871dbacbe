//! File formats: edge lists, pair lists, embedding tables and CSV outputs.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use linkpred_core::graph::parse_edge_line;
use linkpred_core::{AmfModel, FeatureMatrix, GraphError, InteractionGraph, Pair, PairSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}, line {line}: {reason}")]
    Format { path: PathBuf, line: usize, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn load_edge_list(path: &Path, delimiter: char) -> Result<InteractionGraph, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    linkpred_core::graph::parse_edge_list(&text, delimiter).map_err(|source| IoError::Graph {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_edge_list(path: &Path, g: &InteractionGraph, delimiter: char) -> Result<(), IoError> {
    fs::write(path, g.to_edge_list(delimiter)).map_err(io_err(path))
}

/// Reads a pair file (edge-list syntax) as name pairs. Self-pairs are errors.
pub fn load_name_pairs(path: &Path, delimiter: char) -> Result<Vec<(String, String)>, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let parsed = parse_edge_line(&line, delimiter, i + 1).map_err(|source| IoError::Graph {
            path: path.to_path_buf(),
            source,
        })?;
        if let Some((a, b)) = parsed {
            pairs.push((a.to_string(), b.to_string()));
        }
    }
    Ok(pairs)
}

/// Maps name pairs onto `g`; pairs naming a node absent from `g` are
/// dropped and counted.
pub fn pairs_in_graph(g: &InteractionGraph, names: &[(String, String)]) -> (PairSet, usize) {
    let mut set = PairSet::new();
    let mut dropped = 0;
    for (a, b) in names {
        match (g.id_of(a), g.id_of(b)) {
            (Some(x), Some(y)) => {
                set.insert(Pair::new(x, y));
            }
            _ => dropped += 1,
        }
    }
    (set, dropped)
}

/// Node embeddings with their biases, plus the model-wide parameters in
/// header comments: one row per node, `k` factor columns, then the bias.
pub fn write_embeddings(path: &Path, names: &[String], model: &AmfModel, alpha: Option<f64>) -> Result<(), IoError> {
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let mut text = String::new();
    if let Some(a) = alpha {
        text.push_str(&format!("# alpha={a}\n"));
    }
    text.push_str(&format!("# global_bias={}\n", model.global_bias()));
    let combo: Vec<String> = model.combo_weights().iter().map(f64::to_string).collect();
    text.push_str(&format!("# combo_weights={}\n", combo.join(",")));
    text.push_str("node");
    for f in 0..model.k() {
        text.push_str(&format!("\tf{f}"));
    }
    text.push_str("\tbias\n");
    out.write_all(text.as_bytes()).map_err(io_err(path))?;
    for (id, name) in names.iter().enumerate() {
        let id = id as u32;
        let mut line = name.clone();
        for x in model.embedding(id) {
            line.push('\t');
            line.push_str(&x.to_string());
        }
        line.push('\t');
        line.push_str(&model.node_bias(id).to_string());
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

/// An embedding table read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub names: Vec<String>,
    pub model: AmfModel,
    /// Propagation factor already applied, if any.
    pub alpha: Option<f64>,
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingTable, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |line: usize, reason: &str| IoError::Format {
        path: path.to_path_buf(),
        line,
        reason: reason.to_string(),
    };
    let number = |line: usize, s: &str| s.trim().parse::<f64>().map_err(|_| bad(line, "expected a number"));
    let (mut alpha, mut global, mut combo) = (None, None, None);
    let mut k = None;
    let (mut names, mut emb, mut bias) = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.trim().split_once('=') {
                match key.trim() {
                    "alpha" => alpha = Some(number(n, value)?),
                    "global_bias" => global = Some(number(n, value)?),
                    "combo_weights" => {
                        combo = Some(value.split(',').map(|v| number(n, v)).collect::<Result<Vec<_>, _>>()?)
                    }
                    _ => {}
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match k {
            None => {
                if fields.len() < 3 || fields[0] != "node" || fields[fields.len() - 1] != "bias" {
                    return Err(bad(n, "expected header `node f0 .. bias`"));
                }
                k = Some(fields.len() - 2);
            }
            Some(k) => {
                if fields.len() != k + 2 {
                    return Err(bad(n, "wrong number of columns"));
                }
                names.push(fields[0].to_string());
                for f in &fields[1..=k] {
                    emb.push(number(n, f)?);
                }
                bias.push(number(n, fields[k + 1])?);
            }
        }
    }
    let k = k.ok_or_else(|| bad(1, "missing header"))?;
    let combo = combo.ok_or_else(|| bad(1, "missing `# combo_weights=` header"))?;
    let global = global.ok_or_else(|| bad(1, "missing `# global_bias=` header"))?;
    let model = AmfModel::from_parts(k, &emb, &bias, &combo, global).map_err(|e| bad(1, &e.to_string()))?;
    Ok(EmbeddingTable { names, model, alpha })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, IoError> {
    csv::Writer::from_path(path).map_err(csv_err(path))
}

/// One ranked prediction row.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub drug_a: String,
    pub drug_b: String,
    pub score: f64,
    pub label: Option<bool>,
}

pub fn write_predictions(path: &Path, rows: &[PredictionRow]) -> Result<(), IoError> {
    let mut w = csv_writer(path)?;
    let labeled = rows.first().is_some_and(|r| r.label.is_some());
    let header: &[&str] = if labeled {
        &["drug_a", "drug_b", "score", "label"]
    } else {
        &["drug_a", "drug_b", "score"]
    };
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        let mut rec = vec![r.drug_a.clone(), r.drug_b.clone(), r.score.to_string()];
        if let Some(l) = r.label {
            rec.push(u8::from(l).to_string());
        }
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRow>, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let score = rec.get(2).and_then(|s| s.parse().ok()).ok_or_else(|| IoError::Format {
            path: path.to_path_buf(),
            line: i + 2,
            reason: "bad score".into(),
        })?;
        rows.push(PredictionRow {
            drug_a: rec.get(0).unwrap_or_default().to_string(),
            drug_b: rec.get(1).unwrap_or_default().to_string(),
            score,
            label: rec.get(3).map(|l| l == "1"),
        });
    }
    Ok(rows)
}

/// Writes `(x, y)` points under a two-column header.
pub fn write_points(path: &Path, header: [&str; 2], points: &[(f64, f64)]) -> Result<(), IoError> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for (x, y) in points {
        w.write_record([x.to_string(), y.to_string()]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes rows of cells under a header.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), IoError> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Feature matrix as CSV: node names of each pair, one column per feature,
/// then the label when present.
pub fn write_features(path: &Path, names: &[String], fm: &FeatureMatrix) -> Result<(), IoError> {
    let mut header = vec!["drug_a".to_string(), "drug_b".to_string()];
    header.extend(fm.columns().iter().cloned());
    if fm.labels().is_some() {
        header.push("label".into());
    }
    let mut w = csv_writer(path)?;
    w.write_record(&header).map_err(csv_err(path))?;
    for r in 0..fm.rows() {
        let mut rec = Vec::with_capacity(header.len());
        match fm.pairs() {
            Some(p) => {
                rec.push(names[p[r].lo() as usize].clone());
                rec.push(names[p[r].hi() as usize].clone());
            }
            None => rec.extend([String::new(), String::new()]),
        }
        rec.extend(fm.row(r).iter().map(f64::to_string));
        if let Some(l) = fm.labels() {
            rec.push(u8::from(l[r]).to_string());
        }
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn create_dir(path: &Path) -> Result<(), IoError> {
    fs::create_dir_all(path).map_err(io_err(path))
}
