use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::RunResult;
use crate::error::{Error, Result};
use crate::metrics::Metric;

/// Significance of a grid value against the baseline on one test metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mark {
    #[serde(rename = "+")]
    Better,
    #[serde(rename = "-")]
    Worse,
}

impl Mark {
    pub fn symbol(self) -> &'static str {
        match self {
            Mark::Better => "+",
            Mark::Worse => "-",
        }
    }
}

/// Per-seed values in configured seed order. `null` marks an undefined
/// metric (FSA without misclassifications).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerSeed {
    pub seeds: Vec<u64>,
    pub best_epochs: Vec<usize>,
    pub validation: BTreeMap<Metric, Vec<Option<f64>>>,
    pub test: BTreeMap<Metric, Vec<Option<f64>>>,
}

/// Means over the seeds where a metric is defined.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub validation: BTreeMap<Metric, Option<f64>>,
    pub test: BTreeMap<Metric, Option<f64>>,
    /// Seeds skipped per metric because the value was undefined.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub undefined: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub grid_value: f64,
    pub baseline: bool,
    pub per_seed: PerSeed,
    pub mean: MeanMetrics,
    /// Test-metric marks against the baseline.
    pub marks: BTreeMap<Metric, Mark>,
    /// Two-sided Wilcoxon p-values against the baseline, where defined.
    pub p_values: BTreeMap<Metric, f64>,
    /// Whether this row has the best mean validation value per metric.
    pub best: BTreeMap<Metric, bool>,
}

fn mean_defined(values: &[Option<f64>]) -> (Option<f64>, usize) {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    let skipped = values.len() - defined.len();
    if defined.is_empty() {
        (None, skipped)
    } else {
        (Some(defined.iter().sum::<f64>() / defined.len() as f64), skipped)
    }
}

impl ReportRow {
    pub(crate) fn from_runs(grid_value: f64, baseline: bool, runs: &[RunResult], metrics: &[Metric]) -> Self {
        let mut per_seed = PerSeed {
            seeds: runs.iter().map(|r| r.seed).collect(),
            best_epochs: runs.iter().map(|r| r.best_epoch).collect(),
            ..PerSeed::default()
        };
        let mut mean = MeanMetrics::default();
        for &m in metrics {
            let val: Vec<Option<f64>> = runs.iter().map(|r| r.validation[&m]).collect();
            let test: Vec<Option<f64>> = runs.iter().map(|r| r.test[&m]).collect();
            let (val_mean, val_skipped) = mean_defined(&val);
            let (test_mean, test_skipped) = mean_defined(&test);
            mean.validation.insert(m, val_mean);
            mean.test.insert(m, test_mean);
            if val_skipped > 0 {
                mean.undefined.insert(format!("validation.{m}"), val_skipped);
            }
            if test_skipped > 0 {
                mean.undefined.insert(format!("test.{m}"), test_skipped);
            }
            per_seed.validation.insert(m, val);
            per_seed.test.insert(m, test);
        }
        Self {
            grid_value,
            baseline,
            per_seed,
            mean,
            marks: BTreeMap::new(),
            p_values: BTreeMap::new(),
            best: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub wall_time_seconds: f64,
    pub version: String,
    /// Max deviation of the baseline matrix from the identity.
    pub baseline_identity_distance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped_classes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub meta: ReportMeta,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn row(&self, grid_value: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.grid_value == grid_value)
    }

    /// Grid value flagged best on mean validation `metric`.
    pub fn best_grid_value(&self, metric: Metric) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.best.get(&metric).copied().unwrap_or(false))
            .map(|r| r.grid_value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
    Both,
}

fn cell(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

/// Table per split; best validation means in bold, test means carry the
/// significance mark against the baseline.
pub fn render_markdown(report: &ExperimentReport) -> String {
    let metrics = &report.config.metrics;
    let parameter = match report.config.technique() {
        super::Technique::Order => "r",
        super::Technique::LowerBound => "l",
    };
    let mut out = String::new();
    let _ = writeln!(out, "# Grid search ({:?} task)\n", report.config.task);
    for (title, is_test) in [("Validation", false), ("Test", true)] {
        let _ = writeln!(out, "## {title}\n");
        let _ = write!(out, "| {parameter} |");
        for m in metrics {
            let _ = write!(out, " {m} |");
        }
        out.push('\n');
        out.push_str("|---|");
        for _ in metrics {
            out.push_str("---|");
        }
        out.push('\n');
        for row in &report.rows {
            let label = if row.baseline {
                format!("{} (baseline)", row.grid_value)
            } else {
                row.grid_value.to_string()
            };
            let _ = write!(out, "| {label} |");
            for m in metrics {
                let means = if is_test { &row.mean.test } else { &row.mean.validation };
                let mut text = cell(means.get(m).copied().flatten());
                if !is_test && row.best.get(m).copied().unwrap_or(false) {
                    text = format!("**{text}**");
                }
                if is_test {
                    if let Some(mark) = row.marks.get(m) {
                        text.push_str(mark.symbol());
                    }
                }
                let _ = write!(out, " {text} |");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "Means over {} seeds. `+`/`-`: significantly better/worse than the baseline (two-sided Wilcoxon signed-rank, alpha 0.05).",
        report.config.seeds.len()
    );
    for w in &report.meta.warnings {
        let _ = writeln!(out, "\nWarning: {w}");
    }
    out
}

/// Writes `report.json` and/or `report.md` into `out_dir` and returns the
/// written paths.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    if matches!(format, ReportFormat::Json | ReportFormat::Both) {
        let path = out_dir.join("report.json");
        fs::write(&path, report.to_json()?).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    if matches!(format, ReportFormat::Markdown | ReportFormat::Both) {
        let path = out_dir.join("report.md");
        fs::write(&path, render_markdown(report)).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
