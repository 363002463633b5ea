//! Benchmark report model and its CSV / JSON / text-table renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ReportFormat;
use crate::error::{Error, Result};
use crate::fusion::{Diagnostics, FusionMethod};
use crate::metrics::{AggregateMetrics, MetricReport};

/// Outcome of one method on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    /// Unique row key: the method id, suffixed when a method appears twice.
    pub name: String,
    pub method: FusionMethod,
    /// Fused image against the upsampled MS and the PAN.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricReport>,
    /// Box-mean downsampled fused image against the original MS.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consistency: Option<MetricReport>,
    /// Fused image against the ground truth, when one exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl MethodRow {
    pub fn label(&self) -> String {
        let base = self.method.label();
        match self.name.strip_prefix(self.method.id()) {
            Some("") | None => base.to_string(),
            Some(suffix) => format!("{base}{suffix}"),
        }
    }

    fn aggregate(&self) -> Option<&AggregateMetrics> {
        self.metrics.as_ref().map(|m| &m.aggregate)
    }
}

/// Row name holding the best value of each metric.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestPerMetric {
    pub cc: Option<String>,
    pub ergas: Option<String>,
    pub quality: Option<String>,
    pub rase: Option<String>,
    pub rmse: Option<String>,
    pub scc: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub dataset: String,
    pub ratio_h_over_l: f64,
    pub rows: Vec<MethodRow>,
    pub best_per_metric: BestPerMetric,
    /// Wall time per row in seconds. Not deterministic.
    #[serde(default)]
    pub runtimes: BTreeMap<String, f64>,
}

/// Table columns, in report order, with "higher is better" flags.
pub const METRIC_COLUMNS: [(&str, &str, bool); 6] = [
    ("cc", "CC", true),
    ("ergas", "ERGAS", false),
    ("quality", "Quality", true),
    ("rase", "RASE", false),
    ("rmse", "RMSE", false),
    ("scc", "SCC", true),
];

fn metric_value(a: &AggregateMetrics, key: &str) -> Option<f64> {
    match key {
        "cc" => Some(a.cc),
        "ergas" => Some(a.ergas),
        "quality" => Some(a.quality),
        "rase" => Some(a.rase),
        "rmse" => Some(a.rmse),
        "scc" => a.scc,
        _ => None,
    }
}

/// Max for CC / Quality / SCC, min for ERGAS / RASE / RMSE. Ties keep the
/// earliest row.
pub fn best_per_metric(rows: &[MethodRow]) -> BestPerMetric {
    let pick = |key: &str, higher: bool| {
        let mut best: Option<(&str, f64)> = None;
        for row in rows {
            let Some(v) = row.aggregate().and_then(|a| metric_value(a, key)) else { continue };
            let better = match best {
                None => true,
                Some((_, b)) => {
                    if higher {
                        v > b
                    } else {
                        v < b
                    }
                }
            };
            if better {
                best = Some((&row.name, v));
            }
        }
        best.map(|(n, _)| n.to_string())
    };
    BestPerMetric {
        cc: pick("cc", true),
        ergas: pick("ergas", false),
        quality: pick("quality", true),
        rase: pick("rase", false),
        rmse: pick("rmse", false),
        scc: pick("scc", true),
    }
}

impl BestPerMetric {
    pub fn get(&self, key: &str) -> Option<&str> {
        match key {
            "cc" => self.cc.as_deref(),
            "ergas" => self.ergas.as_deref(),
            "quality" => self.quality.as_deref(),
            "rase" => self.rase.as_deref(),
            "rmse" => self.rmse.as_deref(),
            "scc" => self.scc.as_deref(),
            _ => None,
        }
    }
}

pub const CSV_HEADER: &str = "method,cc,ergas,quality,rase,rmse,scc";

/// One line per row, values fixed to 4 decimals; failed rows have empty cells.
pub fn to_csv(r: &BenchmarkReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &r.rows {
        out.push_str(&row.name);
        for (key, _, _) in METRIC_COLUMNS {
            out.push(',');
            if let Some(v) = row.aggregate().and_then(|a| metric_value(a, key)) {
                let _ = write!(out, "{v:.4}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn to_json(r: &BenchmarkReport) -> Result<String> {
    serde_json::to_string_pretty(r).map_err(|e| Error::Config(format!("cannot serialize report: {e}")))
}

pub fn from_json(text: &str) -> Result<BenchmarkReport> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("cannot parse report: {e}")))
}

/// Metrics as rows, methods as columns; the best value in each metric row
/// carries a trailing `*`. Failed methods are listed below the table.
pub fn to_text_table(r: &BenchmarkReport) -> String {
    const FIRST: usize = 9;
    const CELL: usize = 14;
    let mut out = String::new();
    let _ = writeln!(out, "{}", r.dataset);
    let _ = write!(out, "{:<FIRST$}", "");
    for row in &r.rows {
        let _ = write!(out, "{:>CELL$}", row.label());
    }
    out.push('\n');
    for (key, title, _) in METRIC_COLUMNS {
        let best = r.best_per_metric.get(key);
        let _ = write!(out, "{title:<FIRST$}");
        for row in &r.rows {
            let cell = match row.aggregate().and_then(|a| metric_value(a, key)) {
                Some(v) if best == Some(row.name.as_str()) => format!("{v:.4}*"),
                Some(v) => format!("{v:.4} "),
                None => "- ".to_string(),
            };
            let _ = write!(out, "{cell:>CELL$}");
        }
        out.push('\n');
    }
    for row in r.rows.iter().filter(|row| row.error.is_some()) {
        let _ = writeln!(out, "! {}: {}", row.name, row.error.as_deref().unwrap_or_default());
    }
    out
}

pub fn render(r: &BenchmarkReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => Ok(to_csv(r)),
        ReportFormat::Json => to_json(r),
        ReportFormat::TextTable => Ok(to_text_table(r)),
    }
}

/// Writes one rendering of the report to `path`.
pub fn emit_report(r: &BenchmarkReport, format: ReportFormat, path: &Path) -> Result<()> {
    fs::write(path, render(r, format)?)?;
    Ok(())
}
