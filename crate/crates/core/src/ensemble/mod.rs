//! Stacking ensemble over base predictor scores.
//!
//! Base predictors (factorization models and similarity indices) score each
//! candidate pair; the scores become the columns of a [`FeatureMatrix`] on
//! which a gradient-boosted tree classifier is fitted.

mod gbt;
mod search;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::metrics::MetricsError;
use crate::pairs::{Pair, PairScorer};

pub use gbt::{gbt_predict, gbt_train, gbt_train_with_history, GbtModel, GbtParams, Tree, TreeNode};
pub use search::{random_search, SearchOutcome, SearchSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("predictor {name:?} knows {nodes} nodes but pair {pair:?} is out of range")]
    NodeMismatch { name: String, nodes: usize, pair: Pair },
    #[error("duplicate feature column {0:?}")]
    DuplicateColumn(String),
    #[error("feature {column:?} is not finite at row {row}")]
    NonFinite { column: String, row: usize },
    #[error("feature matrix has no labels")]
    MissingLabels,
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("feature column {0:?} was not seen during training")]
    MissingColumn(String),
    #[error("data length {data} does not match {rows} rows of {columns} columns")]
    Shape { data: usize, rows: usize, columns: usize },
    #[error("invalid booster parameter: {0}")]
    InvalidParams(&'static str),
    #[error("search spec needs at least one draw and non-empty value lists")]
    EmptySearch,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Row-major matrix of named feature columns with optional binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    columns: Vec<String>,
    data: Vec<f64>,
    rows: usize,
    labels: Option<Vec<bool>>,
    pairs: Option<Vec<Pair>>,
}

impl FeatureMatrix {
    /// Builds a matrix from raw row-major data.
    pub fn new(columns: Vec<String>, data: Vec<f64>, labels: Option<Vec<bool>>) -> Result<Self, EnsembleError> {
        let width = columns.len();
        let rows = data.len().checked_div(width).unwrap_or(0);
        if rows * width != data.len() || labels.as_ref().is_some_and(|l| l.len() != rows) {
            return Err(EnsembleError::Shape {
                data: data.len(),
                rows,
                columns: width,
            });
        }
        for (i, name) in columns.iter().enumerate() {
            if columns[..i].contains(name) {
                return Err(EnsembleError::DuplicateColumn(name.clone()));
            }
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(EnsembleError::NonFinite {
                column: columns[pos % width].clone(),
                row: pos / width,
            });
        }
        Ok(FeatureMatrix {
            columns,
            data,
            rows,
            labels,
            pairs: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.columns.len();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn value(&self, row: usize, column: usize) -> f64 {
        self.data[row * self.columns.len() + column]
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some((0..self.rows).map(|r| self.value(r, c)).collect())
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    /// The pairs behind each row, when built from pairs.
    pub fn pairs(&self) -> Option<&[Pair]> {
        self.pairs.as_deref()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.columns.len());
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            columns: self.columns.clone(),
            data,
            rows: indices.len(),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
            pairs: self.pairs.as_ref().map(|p| indices.iter().map(|&i| p[i]).collect()),
        }
    }
}

/// Scores every pair with every named predictor, one column per predictor.
pub fn build_features(
    pairs: &[Pair],
    labels: Option<&[bool]>,
    predictors: &[(&str, &dyn PairScorer)],
) -> Result<FeatureMatrix, EnsembleError> {
    for (name, predictor) in predictors {
        if let Some(&pair) = pairs.iter().find(|p| p.hi() as usize >= predictor.node_count()) {
            return Err(EnsembleError::NodeMismatch {
                name: name.to_string(),
                nodes: predictor.node_count(),
                pair,
            });
        }
    }
    let mut data = Vec::with_capacity(pairs.len() * predictors.len());
    for &pair in pairs {
        data.extend(predictors.iter().map(|(_, p)| p.score(pair)));
    }
    from_scored_columns(pairs, labels, predictors.iter().map(|(n, _)| n.to_string()).collect(), data)
}

/// Wraps already computed row-major scores for `pairs` as a feature matrix.
pub fn from_scored_columns(
    pairs: &[Pair],
    labels: Option<&[bool]>,
    columns: Vec<String>,
    data: Vec<f64>,
) -> Result<FeatureMatrix, EnsembleError> {
    if labels.is_some_and(|l| l.len() != pairs.len()) || data.len() != pairs.len() * columns.len() {
        return Err(EnsembleError::Shape {
            data: data.len(),
            rows: pairs.len(),
            columns: columns.len(),
        });
    }
    let mut m = FeatureMatrix::new(columns, data, labels.map(<[bool]>::to_vec))?;
    m.rows = pairs.len();
    m.pairs = Some(pairs.to_vec());
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;
    use crate::similarity::{avg_common_neighbors, Measure, SimilarityIndex, SimilarityParams};
    use crate::AmfModel;
    use alloc::vec;

    #[test]
    fn six_predictor_columns() {
        let g = parse_edge_list("a,b\nb,c\nc,d\nd,a\na,e\n", ',').unwrap();
        let index = SimilarityIndex::new(&g);
        let params = SimilarityParams::default();
        let amf = AmfModel::zeros(g.node_count(), 3);
        let scorers = [
            index.scorer(Measure::AvgCommonNeighbors, params),
            index.scorer(Measure::AvgJaccard, params),
            index.scorer(Measure::AdamicAdar, params),
            index.scorer(Measure::Katz, params),
            index.scorer(Measure::Ipf, params),
        ];
        let predictors: Vec<(&str, &dyn PairScorer)> = vec![
            ("AMFP", &amf),
            ("ACN", &scorers[0]),
            ("AJ", &scorers[1]),
            ("AA", &scorers[2]),
            ("Katz", &scorers[3]),
            ("IPF", &scorers[4]),
        ];
        let pairs = [Pair::new(0, 2), Pair::new(1, 3), Pair::new(2, 4)];
        let fm = build_features(&pairs, None, &predictors).unwrap();
        assert_eq!(fm.columns().len(), 6);
        assert_eq!(fm.rows(), 3);
        let acn = fm.column("ACN").unwrap();
        for (p, v) in pairs.iter().zip(acn) {
            assert_eq!(v, avg_common_neighbors(&g, p.lo(), p.hi()));
        }
        assert_eq!(fm.pairs(), Some(&pairs[..]));

        let empty = build_features(&[], None, &predictors).unwrap();
        assert_eq!(empty.rows(), 0);

        let small = AmfModel::zeros(2, 3);
        let bad: Vec<(&str, &dyn PairScorer)> = vec![("AMF", &small)];
        assert!(matches!(build_features(&pairs, None, &bad), Err(EnsembleError::NodeMismatch { .. })));
    }

    #[test]
    fn matrix_validation() {
        let cols = vec!["x".to_string(), "x".to_string()];
        assert!(matches!(FeatureMatrix::new(cols, vec![1.0, 2.0], None), Err(EnsembleError::DuplicateColumn(_))));
        let cols = vec!["x".to_string(), "y".to_string()];
        assert!(matches!(
            FeatureMatrix::new(cols.clone(), vec![1.0, f64::NAN], None),
            Err(EnsembleError::NonFinite { row: 0, .. })
        ));
        assert!(matches!(FeatureMatrix::new(cols.clone(), vec![1.0, 2.0, 3.0], None), Err(EnsembleError::Shape { .. })));
        let m = FeatureMatrix::new(cols, vec![1.0, 2.0, 3.0, 4.0], Some(vec![true, false])).unwrap();
        let s = m.select(&[1, 1, 0]);
        assert_eq!(s.row(0), &[3.0, 4.0]);
        assert_eq!(s.labels(), Some(&[false, false, true][..]));
    }
}
