//! Experiment configuration: a flat `key = value` text file.
//!
//! Lines starting with `#` are comments, as is anything after ` #` on a
//! value line. List values are comma separated. Command-line overrides are
//! applied on top of the file before the values are resolved, and the
//! resolved configuration is written back in the same format, so a run
//! manifest can be fed to the tool again as a config file.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use linkpred_core::ensemble::SearchSpec;
use linkpred_core::{Measure, SimilarityParams, TrainConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Retrospective,
    Holdout,
    Crossval,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Retrospective => "retrospective",
            Protocol::Holdout => "holdout",
            Protocol::Crossval => "crossval",
        }
    }

    /// Model settings tuned for the protocol.
    pub fn train_preset(self) -> TrainConfig {
        match self {
            Protocol::Retrospective => TrainConfig::retrospective(),
            Protocol::Holdout => TrainConfig::holdout(),
            Protocol::Crossval => TrainConfig::cross_validation(),
        }
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "retrospective" => Ok(Protocol::Retrospective),
            "holdout" => Ok(Protocol::Holdout),
            "crossval" | "cross-validation" => Ok(Protocol::Crossval),
            _ => Err("expected retrospective, holdout or crossval".into()),
        }
    }
}

/// A scored predictor in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Predictor {
    Amf,
    Amfp,
    Similarity(Measure),
    Ensemble,
}

impl Predictor {
    pub fn name(self) -> &'static str {
        match self {
            Predictor::Amf => "AMF",
            Predictor::Amfp => "AMFP",
            Predictor::Similarity(m) => m.name(),
            Predictor::Ensemble => "Ensemble",
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Predictor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "amf" => Ok(Predictor::Amf),
            "amfp" => Ok(Predictor::Amfp),
            "ensemble" | "gbt" | "xgboost" => Ok(Predictor::Ensemble),
            other => other.parse().map(Predictor::Similarity).map_err(|e| format!("{e}")),
        }
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    /// Earliest release (retrospective).
    pub train: Option<PathBuf>,
    /// Middle release (retrospective); absent in two-release mode.
    pub validation: Option<PathBuf>,
    /// Latest release (retrospective).
    pub test: Option<PathBuf>,
    /// Single release (holdout, crossval, export).
    pub graph: Option<PathBuf>,
    pub delimiter: char,
    pub exclusions: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// Model settings to compare on the validation set (Cartesian product
    /// of the list-valued model keys).
    pub amf_grid: Vec<TrainConfig>,
    pub alpha_grid: Vec<f64>,
    /// Propagation factor where no validation stage selects one.
    pub alpha: f64,
    pub similarity: SimilarityParams,
    pub predictors: Vec<Predictor>,
    /// Input columns of the ensemble; scored even when not reported.
    pub ensemble_features: Vec<Predictor>,
    pub search: SearchSpec,
    pub test_fraction: f64,
    pub validation_fraction: f64,
    /// Share of the earliest release's edges held out to stand in for a
    /// middle release when only two releases are given.
    pub pseudo_release_fraction: f64,
    /// Sampled non-edges per edge in the holdout and crossval pools.
    pub negative_pool_ratio: f64,
    pub folds: usize,
    pub repeats: usize,
    pub precision_n: Vec<usize>,
    pub per_drug_n: Vec<usize>,
    pub bootstrap_resamples: usize,
    pub curve_points: usize,
    pub top_n: usize,
}

impl ExperimentConfig {
    /// Defaults for `protocol` with no data paths.
    pub fn new(protocol: Protocol) -> Self {
        ExperimentConfig {
            protocol,
            train: None,
            validation: None,
            test: None,
            graph: None,
            delimiter: ',',
            exclusions: None,
            out_dir: PathBuf::from("linkpred-out"),
            seed: 0,
            workers: 0,
            amf_grid: vec![protocol.train_preset()],
            alpha_grid: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
            alpha: 0.5,
            similarity: SimilarityParams::default(),
            predictors: vec![
                Predictor::Amf,
                Predictor::Amfp,
                Predictor::Similarity(Measure::AvgCommonNeighbors),
                Predictor::Similarity(Measure::AvgJaccard),
                Predictor::Similarity(Measure::AdamicAdar),
                Predictor::Similarity(Measure::Katz),
                Predictor::Similarity(Measure::Ipf),
                Predictor::Ensemble,
            ],
            ensemble_features: vec![
                Predictor::Amfp,
                Predictor::Similarity(Measure::AvgCommonNeighbors),
                Predictor::Similarity(Measure::AvgJaccard),
                Predictor::Similarity(Measure::AdamicAdar),
                Predictor::Similarity(Measure::Katz),
                Predictor::Similarity(Measure::Ipf),
            ],
            search: SearchSpec::default(),
            test_fraction: 0.3,
            validation_fraction: 0.1,
            pseudo_release_fraction: 0.1,
            negative_pool_ratio: 1.0,
            folds: 5,
            repeats: 5,
            precision_n: vec![1, 5, 10, 20, 50, 100],
            per_drug_n: vec![1, 5, 10],
            bootstrap_resamples: 1000,
            curve_points: 1000,
            top_n: 100,
        }
    }

    pub fn from_file(path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text, overrides)
    }

    pub fn from_text(text: &str, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut map = parse_key_values(text)?;
        for (k, v) in overrides {
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_map(map)
    }

    pub fn from_map(mut map: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let protocol = match map.remove("protocol") {
            Some(v) => parse_value::<Protocol>("protocol", &v)?,
            None => Protocol::Retrospective,
        };
        let mut cfg = ExperimentConfig::new(protocol);
        let preset = protocol.train_preset();
        let mut model = ModelLists::from_preset(&preset);
        for (key, value) in &map {
            let v = value.as_str();
            match key.as_str() {
                "train" => cfg.train = optional_path(v),
                "validation" => cfg.validation = optional_path(v),
                "test" => cfg.test = optional_path(v),
                "graph" => cfg.graph = optional_path(v),
                "exclusions" => cfg.exclusions = optional_path(v),
                "out_dir" => cfg.out_dir = PathBuf::from(v),
                "delimiter" => cfg.delimiter = parse_delimiter(v)?,
                "seed" => cfg.seed = parse_value(key, v)?,
                "workers" => cfg.workers = parse_value(key, v)?,
                "k" => model.k = parse_list(key, v)?,
                "dropout" => model.dropout = parse_list(key, v)?,
                "learning_rate" => model.learning_rate = parse_list(key, v)?,
                "epochs" => model.epochs = parse_list(key, v)?,
                "batch_size" => model.batch_size = parse_list(key, v)?,
                "neg_ratio" => model.neg_ratio = parse_value(key, v)?,
                "adam_beta1" => model.beta1 = parse_value(key, v)?,
                "adam_beta2" => model.beta2 = parse_value(key, v)?,
                "adam_epsilon" => model.epsilon = parse_value(key, v)?,
                "alpha_grid" => cfg.alpha_grid = parse_list(key, v)?,
                "alpha" => cfg.alpha = parse_value(key, v)?,
                "katz_beta" => cfg.similarity.katz_beta = parse_value(key, v)?,
                "katz_max_len" => cfg.similarity.katz_max_len = parse_value(key, v)?,
                "predictors" => cfg.predictors = parse_list(key, v)?,
                "ensemble_features" => cfg.ensemble_features = parse_list(key, v)?,
                "search_draws" => cfg.search.draws = parse_value(key, v)?,
                "search_rounds" => cfg.search.rounds = parse_list(key, v)?,
                "search_max_depth" => cfg.search.max_depth = parse_list(key, v)?,
                "search_learning_rate" => cfg.search.learning_rate = parse_list(key, v)?,
                "search_min_child_weight" => cfg.search.min_child_weight = parse_list(key, v)?,
                "search_subsample" => cfg.search.subsample = parse_list(key, v)?,
                "test_fraction" => cfg.test_fraction = parse_value(key, v)?,
                "validation_fraction" => cfg.validation_fraction = parse_value(key, v)?,
                "pseudo_release_fraction" => cfg.pseudo_release_fraction = parse_value(key, v)?,
                "negative_pool_ratio" => cfg.negative_pool_ratio = parse_value(key, v)?,
                "folds" => cfg.folds = parse_value(key, v)?,
                "repeats" => cfg.repeats = parse_value(key, v)?,
                "precision_n" => cfg.precision_n = parse_list(key, v)?,
                "per_drug_n" => cfg.per_drug_n = parse_list(key, v)?,
                "bootstrap_resamples" => cfg.bootstrap_resamples = parse_value(key, v)?,
                "curve_points" => cfg.curve_points = parse_value(key, v)?,
                "top_n" => cfg.top_n = parse_value(key, v)?,
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            }
        }
        cfg.amf_grid = model.grid(&preset);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: &str| Err(ConfigError::Invalid(msg.to_string()));
        for tc in &self.amf_grid {
            tc.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        self.similarity.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return invalid("alpha_grid must be a non-empty list of values in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return invalid("alpha must lie in [0, 1]");
        }
        let fraction = |f: f64| f > 0.0 && f < 1.0;
        if !fraction(self.test_fraction)
            || !fraction(self.validation_fraction)
            || self.test_fraction + self.validation_fraction >= 1.0
        {
            return invalid("test_fraction and validation_fraction must lie in (0, 1) and sum below 1");
        }
        if !fraction(self.pseudo_release_fraction) {
            return invalid("pseudo_release_fraction must lie in (0, 1)");
        }
        if !(self.negative_pool_ratio > 0.0 && self.negative_pool_ratio.is_finite()) {
            return invalid("negative_pool_ratio must be positive");
        }
        if self.folds < 2 {
            return invalid("folds must be at least 2");
        }
        if self.repeats == 0 {
            return invalid("repeats must be at least 1");
        }
        if self.predictors.is_empty() {
            return invalid("predictors must not be empty");
        }
        if self.uses(Predictor::Ensemble)
            && (self.ensemble_features.is_empty() || self.ensemble_features.contains(&Predictor::Ensemble))
        {
            return invalid("ensemble_features must list at least one base predictor and not the ensemble");
        }
        if self.precision_n.contains(&0) || self.per_drug_n.contains(&0) {
            return invalid("precision cut-offs must be at least 1");
        }
        if self.curve_points < 2 {
            return invalid("curve_points must be at least 2");
        }
        self.search.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn uses(&self, p: Predictor) -> bool {
        self.predictors.contains(&p)
    }

    /// The resolved settings as `key = value` pairs, in a fixed order.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let grid = &self.amf_grid;
        let first = grid[0];
        let lists = ModelLists::from_grid(grid);
        let delimiter = match self.delimiter {
            '\t' => "tab".to_string(),
            ' ' => "space".to_string(),
            c => c.to_string(),
        };
        vec![
            ("protocol", self.protocol.name().to_string()),
            ("train", path(&self.train)),
            ("validation", path(&self.validation)),
            ("test", path(&self.test)),
            ("graph", path(&self.graph)),
            ("exclusions", path(&self.exclusions)),
            ("delimiter", delimiter),
            ("out_dir", self.out_dir.display().to_string()),
            ("seed", self.seed.to_string()),
            ("workers", self.workers.to_string()),
            ("k", join(&lists.k)),
            ("dropout", join(&lists.dropout)),
            ("learning_rate", join(&lists.learning_rate)),
            ("epochs", join(&lists.epochs)),
            ("batch_size", join(&lists.batch_size)),
            ("neg_ratio", first.neg_ratio.to_string()),
            ("adam_beta1", first.adam_beta1.to_string()),
            ("adam_beta2", first.adam_beta2.to_string()),
            ("adam_epsilon", first.adam_epsilon.to_string()),
            ("alpha_grid", join(&self.alpha_grid)),
            ("alpha", self.alpha.to_string()),
            ("katz_beta", self.similarity.katz_beta.to_string()),
            ("katz_max_len", self.similarity.katz_max_len.to_string()),
            ("predictors", join(&self.predictors)),
            ("ensemble_features", join(&self.ensemble_features)),
            ("search_draws", self.search.draws.to_string()),
            ("search_rounds", join(&self.search.rounds)),
            ("search_max_depth", join(&self.search.max_depth)),
            ("search_learning_rate", join(&self.search.learning_rate)),
            ("search_min_child_weight", join(&self.search.min_child_weight)),
            ("search_subsample", join(&self.search.subsample)),
            ("test_fraction", self.test_fraction.to_string()),
            ("validation_fraction", self.validation_fraction.to_string()),
            ("pseudo_release_fraction", self.pseudo_release_fraction.to_string()),
            ("negative_pool_ratio", self.negative_pool_ratio.to_string()),
            ("folds", self.folds.to_string()),
            ("repeats", self.repeats.to_string()),
            ("precision_n", join(&self.precision_n)),
            ("per_drug_n", join(&self.per_drug_n)),
            ("bootstrap_resamples", self.bootstrap_resamples.to_string()),
            ("curve_points", self.curve_points.to_string()),
            ("top_n", self.top_n.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        self.to_key_values()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Model keys that accept lists; the grid is their Cartesian product.
struct ModelLists {
    k: Vec<usize>,
    dropout: Vec<f64>,
    learning_rate: Vec<f64>,
    epochs: Vec<usize>,
    batch_size: Vec<usize>,
    neg_ratio: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl ModelLists {
    fn from_preset(p: &TrainConfig) -> Self {
        ModelLists {
            k: vec![p.k],
            dropout: vec![p.dropout],
            learning_rate: vec![p.learning_rate],
            epochs: vec![p.epochs],
            batch_size: vec![p.batch_size],
            neg_ratio: p.neg_ratio,
            beta1: p.adam_beta1,
            beta2: p.adam_beta2,
            epsilon: p.adam_epsilon,
        }
    }

    fn from_grid(grid: &[TrainConfig]) -> Self {
        fn distinct<T: PartialEq + Copy>(grid: &[TrainConfig], f: impl Fn(&TrainConfig) -> T) -> Vec<T> {
            let mut out: Vec<T> = Vec::new();
            for tc in grid {
                let v = f(tc);
                if !out.contains(&v) {
                    out.push(v);
                }
            }
            out
        }
        let mut lists = ModelLists::from_preset(&grid[0]);
        lists.k = distinct(grid, |t| t.k);
        lists.dropout = distinct(grid, |t| t.dropout);
        lists.learning_rate = distinct(grid, |t| t.learning_rate);
        lists.epochs = distinct(grid, |t| t.epochs);
        lists.batch_size = distinct(grid, |t| t.batch_size);
        lists
    }

    fn grid(&self, preset: &TrainConfig) -> Vec<TrainConfig> {
        let mut out = Vec::new();
        for &k in &self.k {
            for &dropout in &self.dropout {
                for &learning_rate in &self.learning_rate {
                    for &epochs in &self.epochs {
                        for &batch_size in &self.batch_size {
                            out.push(TrainConfig {
                                k,
                                dropout,
                                learning_rate,
                                epochs,
                                batch_size,
                                neg_ratio: self.neg_ratio,
                                adam_beta1: self.beta1,
                                adam_beta2: self.beta2,
                                adam_epsilon: self.epsilon,
                                ..*preset
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Parses `key = value` lines, skipping blanks and comments.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let line = match line.find(" #").or_else(|| line.find("\t#")) {
            Some(pos) => line[..pos].trim_end(),
            None => line,
        };
        let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Splits a `key=value` command-line override.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got `{s}`"))
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(ConfigError::Value {
            key: key.to_string(),
            value: value.to_string(),
            reason: "empty list".into(),
        });
    }
    Ok(items)
}

fn parse_delimiter(value: &str) -> Result<char, ConfigError> {
    match value {
        "tab" | "\\t" => Ok('\t'),
        "space" => Ok(' '),
        v if v.chars().count() == 1 => Ok(v.chars().next().unwrap()),
        v => Err(ConfigError::Value {
            key: "delimiter".into(),
            value: v.into(),
            reason: "expected a single character, `tab` or `space`".into(),
        }),
    }
}

fn optional_path(v: &str) -> Option<PathBuf> {
    (!v.is_empty()).then(|| PathBuf::from(v))
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}
