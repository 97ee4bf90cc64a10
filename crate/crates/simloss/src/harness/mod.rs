//! Grid-search experiments over the similarity-matrix parameter.
//!
//! For every grid value and seed the harness builds the matrix, trains a
//! network, and evaluates the configured metrics on the validation and test
//! splits. Runs with the same seed share the initial network and the
//! mini-batch order across grid values, so per-seed test metrics can be
//! compared against the baseline with a paired Wilcoxon test.

mod analysis;
mod config;
mod report;

use std::collections::BTreeMap;
use std::time::Instant;

use ndarray::Array2;
use rayon::prelude::*;

pub use analysis::{analyze_distributions, AnalysisRow, DistributionAnalysis};
pub use config::{DataConfig, ExperimentConfig, ExternalData, SplitFractions, Task, Technique, TrainSection};
pub use report::{emit_report, render_markdown, ExperimentReport, Mark, MeanMetrics, PerSeed, ReportFormat, ReportMeta, ReportRow};

use crate::data::{self, select_embeddings, split, synth_grouped, synth_ordinal, Splits};
use crate::error::{Error, Result};
use crate::loss::LabelBatch;
use crate::metrics::{wilcoxon_signed_rank, Direction, Metric, PairedSamples, SuperclassMap, DEFAULT_ALPHA};
use crate::model::{train, DenseNet};
use crate::rng::mix_seed;
use crate::sim_matrix::{lower_bound_matrix, order_matrix, EmbeddingTable, SimilarityMatrix};

/// Largest deviation from the identity tolerated at the baseline point.
pub const BASELINE_IDENTITY_TOLERANCE: f64 = 1e-9;

/// Data and matrix ingredients shared by every run of an experiment.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    pub config: ExperimentConfig,
    /// Standardized splits.
    pub splits: Splits,
    pub technique: Technique,
    /// Clamped cosine similarities; present for the lower-bound technique.
    pub raw_similarity: Option<Array2<f64>>,
    pub class_count: usize,
    pub dropped_classes: Vec<String>,
}

impl PreparedExperiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let technique = config.technique();
        let d = &config.data;
        let mut dropped_classes = Vec::new();
        let (dataset, table): (data::Dataset, Option<EmbeddingTable>) = match config.task {
            Task::Ordinal => (synth_ordinal(d.ordinal.as_ref().expect("validated"), d.seed)?, None),
            Task::Grouped => {
                let (dataset, table) = synth_grouped(d.grouped.as_ref().expect("validated"), d.seed)?;
                (dataset, Some(table))
            }
            Task::External => {
                let ext = d.external.as_ref().expect("validated");
                let dataset = data::load_csv(&ext.features)?;
                match (&ext.embeddings, technique) {
                    (Some(path), Technique::LowerBound) => {
                        let table = EmbeddingTable::read(path)?;
                        let names = match &ext.class_names {
                            Some(names) => names.clone(),
                            None => default_class_names(&table, dataset.class_count())?,
                        };
                        if names.len() != dataset.class_count() {
                            return Err(Error::Config(format!(
                                "{} class names for {} classes",
                                names.len(),
                                dataset.class_count()
                            )));
                        }
                        let selection = select_embeddings(&table, &names)?;
                        dropped_classes = selection.dropped.clone();
                        (selection.apply(&dataset)?, Some(selection.table))
                    }
                    _ => (dataset, None),
                }
            }
        };
        if config.metrics.iter().any(|m| m.needs_superclasses()) && dataset.superclasses().is_none() {
            return Err(Error::Config("superclass metrics requested but the data has no superclasses".into()));
        }
        let class_count = dataset.class_count();
        let splits = split(&dataset, &d.split_spec()?)?.standardized();
        let raw_similarity = match technique {
            Technique::Order => None,
            Technique::LowerBound => Some(
                table
                    .ok_or_else(|| Error::Config("lower-bound technique needs embeddings".into()))?
                    .similarity_matrix(),
            ),
        };
        Ok(Self {
            config: config.clone(),
            splits,
            technique,
            raw_similarity,
            class_count,
            dropped_classes,
        })
    }

    pub fn matrix_for(&self, grid_value: f64) -> Result<SimilarityMatrix> {
        match self.technique {
            Technique::Order => order_matrix(self.class_count, grid_value),
            Technique::LowerBound => lower_bound_matrix(
                self.raw_similarity.as_ref().expect("present for lower bound").view(),
                grid_value,
            ),
        }
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.splits.train.feature_width()];
        sizes.extend(&self.config.train.hidden);
        sizes.push(self.class_count);
        sizes
    }

    /// Seed of the run stream for a configured seed; independent of the grid
    /// value so runs pair up across the grid.
    pub fn run_seed(&self, seed: u64) -> u64 {
        mix_seed(self.config.data.seed, seed)
    }

    fn superclasses(&self) -> Option<&SuperclassMap> {
        self.splits.test.superclasses()
    }
}

fn default_class_names(table: &EmbeddingTable, class_count: usize) -> Result<Vec<String>> {
    if table.len() < class_count {
        return Err(Error::Config(format!(
            "embedding file has {} entries for {class_count} classes; give class_names explicitly",
            table.len()
        )));
    }
    Ok(table.names()[..class_count].to_vec())
}

/// Result of one (grid value, seed) run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub grid_value: f64,
    pub seed: u64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub validation: BTreeMap<Metric, Option<f64>>,
    pub test: BTreeMap<Metric, Option<f64>>,
    pub network: DenseNet,
}

fn evaluate(net: &DenseNet, data: &data::Dataset, metrics: &[Metric], map: Option<&SuperclassMap>) -> Result<BTreeMap<Metric, Option<f64>>> {
    let predictions = net.predict(data.features())?;
    let targets = LabelBatch::from_vec(data.labels().to_vec());
    metrics
        .iter()
        .map(|&m| Ok((m, m.evaluate(&predictions, &targets, map)?)))
        .collect()
}

pub fn run_single(prepared: &PreparedExperiment, grid_value: f64, seed: u64) -> Result<RunResult> {
    let wrap = |e: Error| Error::Run {
        grid_value,
        seed,
        source: Box::new(e),
    };
    let matrix = prepared.matrix_for(grid_value).map_err(wrap)?;
    let config = prepared.config.train.train_config(prepared.run_seed(seed));
    let outcome = train(&prepared.splits, &matrix, &prepared.layer_sizes(), &config).map_err(wrap)?;
    let metrics = &prepared.config.metrics;
    let map = prepared.superclasses();
    let validation = evaluate(&outcome.network, &prepared.splits.validation, metrics, map).map_err(wrap)?;
    let test = evaluate(&outcome.network, &prepared.splits.test, metrics, map).map_err(wrap)?;
    Ok(RunResult {
        grid_value,
        seed,
        best_epoch: outcome.best_epoch,
        epochs_run: outcome.history.len(),
        validation,
        test,
        network: outcome.network,
    })
}

/// A finished grid: the report plus every trained network, indexed
/// `[grid position][seed position]`.
#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub report: ExperimentReport,
    pub networks: Vec<Vec<DenseNet>>,
    pub prepared: PreparedExperiment,
}

/// Runs the grid on the current rayon pool.
pub fn run_grid(config: &ExperimentConfig) -> Result<ExperimentReport> {
    Ok(run_grid_with_models(config, None)?.report)
}

/// Runs the grid and keeps the trained networks. `jobs` bounds the worker
/// count; `None` uses the global rayon pool. Results do not depend on it.
pub fn run_grid_with_models(config: &ExperimentConfig, jobs: Option<usize>) -> Result<GridOutcome> {
    let started = Instant::now();
    let prepared = PreparedExperiment::new(config)?;

    let mut warnings = Vec::new();
    let baseline = config.baseline_value();
    let distance = prepared.matrix_for(baseline)?.distance_from_identity();
    if distance > BASELINE_IDENTITY_TOLERANCE {
        warnings.push(format!(
            "baseline grid value {baseline} gives a matrix {distance:e} away from the identity; it is not a true cross-entropy reference"
        ));
    }

    let tasks: Vec<(f64, u64)> = config
        .grid
        .iter()
        .flat_map(|&g| config.seeds.iter().map(move |&s| (g, s)))
        .collect();
    let execute = || -> Result<Vec<RunResult>> {
        tasks
            .par_iter()
            .map(|&(g, s)| run_single(&prepared, g, s))
            .collect()
    };
    let runs = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?
            .install(execute)?,
        None => execute()?,
    };

    let per_grid: Vec<&[RunResult]> = runs.chunks(config.seeds.len()).collect();
    let mut rows: Vec<ReportRow> = per_grid
        .iter()
        .zip(&config.grid)
        .map(|(runs, &g)| ReportRow::from_runs(g, g == baseline, runs, &config.metrics))
        .collect();
    mark_significance(&mut rows, config.baseline_index(), &config.metrics);
    mark_best(&mut rows, &config.metrics);

    let networks = per_grid
        .iter()
        .map(|runs| runs.iter().map(|r| r.network.clone()).collect())
        .collect();
    let report = ExperimentReport {
        config: config.clone(),
        rows,
        meta: ReportMeta {
            wall_time_seconds: started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            baseline_identity_distance: distance,
            dropped_classes: prepared.dropped_classes.clone(),
            warnings,
        },
    };
    Ok(GridOutcome {
        report,
        networks,
        prepared,
    })
}

/// Wilcoxon p-value of `row` against `baseline` on the seeds where both
/// values are defined. `None` when no test is possible.
pub fn paired_test(row: &[Option<f64>], baseline: &[Option<f64>]) -> Option<crate::metrics::WilcoxonResult> {
    let (a, b): (Vec<f64>, Vec<f64>) = row
        .iter()
        .zip(baseline)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .unzip();
    let samples = PairedSamples::new(a, b).ok()?;
    wilcoxon_signed_rank(&samples, DEFAULT_ALPHA).ok()
}

fn mark_significance(rows: &mut [ReportRow], baseline: usize, metrics: &[Metric]) {
    let reference = rows[baseline].per_seed.test.clone();
    for (i, row) in rows.iter_mut().enumerate() {
        if i == baseline {
            continue;
        }
        for &m in metrics {
            let Some(result) = paired_test(&row.per_seed.test[&m], &reference[&m]) else {
                continue;
            };
            row.p_values.insert(m, result.p_value);
            if !result.significant {
                continue;
            }
            let row_higher = match result.direction {
                Direction::AHigher => true,
                Direction::BHigher => false,
                Direction::None => continue,
            };
            let mark = if row_higher == m.higher_is_better() { Mark::Better } else { Mark::Worse };
            row.marks.insert(m, mark);
        }
    }
}

fn mark_best(rows: &mut [ReportRow], metrics: &[Metric]) {
    for &m in metrics {
        let mut best: Option<(usize, f64)> = None;
        for (i, row) in rows.iter().enumerate() {
            let Some(v) = row.mean.validation[&m] else { continue };
            let better = match best {
                None => true,
                Some((_, b)) if m.higher_is_better() => v > b,
                Some((_, b)) => v < b,
            };
            if better {
                best = Some((i, v));
            }
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.best.insert(m, best.is_some_and(|(b, _)| b == i));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config(grid: &str, seeds: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{
                "task": "ordinal",
                "data": {{"seed": 3, "ordinal": {{"class_count": 4, "per_class": 15, "noise_sigma": 0.3}}}},
                "grid": {grid},
                "seeds": {seeds},
                "train": {{"patience": 2, "max_epochs": 4, "early_stop_metric": "validation_mae", "hidden": [8]}},
                "metrics": ["accuracy", "mae", "mse"]
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn baseline_only_grid() {
        let report = run_grid(&tiny_config("[0.0]", "[1, 2]")).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.rows[0].marks.is_empty());
        assert!(report.rows[0].baseline);
        assert!(report.rows[0].best.values().all(|&b| b));
    }

    #[test]
    fn single_seed_gives_no_marks() {
        let report = run_grid(&tiny_config("[0.0, 0.5, 0.9]", "[4]")).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows.iter().all(|r| r.marks.is_empty()));
        assert_eq!(report.meta.baseline_identity_distance, 0.0);
    }

    #[test]
    fn jobs_do_not_change_results() {
        let config = tiny_config("[0.0, 0.7]", "[1, 2, 3]");
        let a = run_grid_with_models(&config, Some(1)).unwrap();
        let b = run_grid_with_models(&config, Some(3)).unwrap();
        assert_eq!(a.report.rows, b.report.rows);
        assert_eq!(a.networks, b.networks);
    }

    #[test]
    fn seeds_pair_across_grid_values() {
        let a = PreparedExperiment::new(&tiny_config("[0.0, 0.7]", "[1]")).unwrap();
        let b = PreparedExperiment::new(&tiny_config("[0.0, 0.3, 0.5]", "[1]")).unwrap();
        assert_eq!(a.run_seed(1), b.run_seed(1));
        assert_eq!(a.splits.train.features(), b.splits.train.features());
        assert_ne!(a.run_seed(1), a.run_seed(2));
    }

    #[test]
    fn marks_follow_metric_orientation() {
        let metrics = [Metric::Accuracy, Metric::Mae];
        let mk = |acc: Vec<f64>, mae: Vec<f64>| {
            let mut per_seed = PerSeed::default();
            per_seed.test.insert(Metric::Accuracy, acc.into_iter().map(Some).collect());
            per_seed.test.insert(Metric::Mae, mae.into_iter().map(Some).collect());
            ReportRow {
                grid_value: 0.0,
                baseline: false,
                per_seed,
                mean: MeanMetrics::default(),
                marks: BTreeMap::new(),
                p_values: BTreeMap::new(),
                best: BTreeMap::new(),
            }
        };
        let base = mk(vec![0.5; 8], vec![2.0; 8]);
        let better: Vec<f64> = (1..=8).map(|i| 0.5 + i as f64 / 100.0).collect();
        let worse_mae: Vec<f64> = (1..=8).map(|i| 2.0 + i as f64 / 10.0).collect();
        let mut rows = vec![base, mk(better, worse_mae)];
        mark_significance(&mut rows, 0, &metrics);
        assert_eq!(rows[1].marks[&Metric::Accuracy], Mark::Better);
        assert_eq!(rows[1].marks[&Metric::Mae], Mark::Worse);
        assert!(rows[0].marks.is_empty());
    }

    #[test]
    fn undefined_values_are_skipped_in_pairing() {
        let row = [Some(1.0), None, Some(3.0)];
        let base = [Some(0.0), Some(1.0), None];
        let r = paired_test(&row, &base).unwrap();
        assert_eq!(r.n, 1);
        assert!(paired_test(&[None], &[Some(1.0)]).is_none());
    }
}
