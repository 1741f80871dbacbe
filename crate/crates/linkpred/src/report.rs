//! Metric tables: `metric,name,value` CSV rows and a plain-text summary.

use std::fmt::Write as _;
use std::path::Path;

use linkpred_core::metrics::BootstrapComparison;
use linkpred_core::EvalReport;

use crate::io::{self, IoError};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub metric: String,
    pub name: String,
    pub value: f64,
}

impl MetricRow {
    pub fn new(metric: impl Into<String>, name: impl Into<String>, value: f64) -> Self {
        MetricRow {
            metric: metric.into(),
            name: name.into(),
            value,
        }
    }
}

/// Every scalar of `report` for predictor `name`.
pub fn report_rows(name: &str, report: &EvalReport) -> Vec<MetricRow> {
    let mut rows = vec![
        MetricRow::new("auroc", name, report.auroc),
        MetricRow::new("aupr", name, report.aupr),
    ];
    for &(n, p) in &report.precision_at {
        rows.push(MetricRow::new(format!("precision@{n}"), name, p));
    }
    for &(n, p) in &report.per_drug_avg_precision_at {
        rows.push(MetricRow::new(format!("per_drug_precision@{n}"), name, p));
    }
    rows.push(MetricRow::new("positives", name, report.positives as f64));
    rows.push(MetricRow::new("negatives", name, report.negatives as f64));
    rows.push(MetricRow::new("drugs_evaluated", name, report.drugs_evaluated as f64));
    rows
}

/// Rows for a paired comparison of `name` against `reference`.
pub fn bootstrap_rows(name: &str, reference: &str, cmp: &BootstrapComparison) -> Vec<MetricRow> {
    vec![
        MetricRow::new(format!("delta_auroc_vs_{reference}"), name, cmp.delta),
        MetricRow::new(format!("delta_ci_low_vs_{reference}"), name, cmp.ci_low),
        MetricRow::new(format!("delta_ci_high_vs_{reference}"), name, cmp.ci_high),
        MetricRow::new(format!("p_value_vs_{reference}"), name, cmp.p_value),
    ]
}

pub fn write_metrics(path: &Path, rows: &[MetricRow]) -> Result<(), IoError> {
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.metric.clone(), r.name.clone(), r.value.to_string()])
        .collect();
    io::write_table(path, &["metric", "name", "value"], &cells)
}

/// At most `max` points: the first, the last and evenly spaced ones between.
pub fn downsample(points: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    if points.len() <= max || max < 2 {
        return points.to_vec();
    }
    let last = points.len() - 1;
    (0..max).map(|i| points[i * last / (max - 1)]).collect()
}

/// A predictor-by-metric text table; rows keep first-appearance order.
pub fn render_table(title: &str, rows: &[MetricRow]) -> String {
    let mut names: Vec<&str> = Vec::new();
    let mut metrics: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.name.as_str()) {
            names.push(&r.name);
        }
        if !metrics.contains(&r.metric.as_str()) {
            metrics.push(&r.metric);
        }
    }
    let cell = |name: &str, metric: &str| {
        rows.iter()
            .find(|r| r.name == name && r.metric == metric)
            .map(|r| format_value(metric, r.value))
            .unwrap_or_else(|| "-".into())
    };
    let name_width = names.iter().map(|n| n.len()).max().unwrap_or(0).max(9);
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{}", "=".repeat(title.len()));
    let _ = write!(out, "{:<name_width$}", "predictor");
    for m in &metrics {
        let _ = write!(out, "  {:>w$}", m, w = m.len().max(10));
    }
    out.push('\n');
    for n in &names {
        let _ = write!(out, "{n:<name_width$}");
        for m in &metrics {
            let _ = write!(out, "  {:>w$}", cell(n, m), w = m.len().max(10));
        }
        out.push('\n');
    }
    out
}

const COUNTS: [&str; 3] = ["positives", "negatives", "drugs_evaluated"];

fn format_value(metric: &str, v: f64) -> String {
    if COUNTS.contains(&metric) {
        format!("{v:.0}")
    } else {
        format!("{v:.4}")
    }
}
