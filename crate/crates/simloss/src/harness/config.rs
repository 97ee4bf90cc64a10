use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{GroupedParams, OrdinalParams, SplitSpec};
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::model::{EarlyStopMetric, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Ordinal,
    Grouped,
    External,
}

/// How the similarity matrix is built from a grid value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    /// Grid values are reduction factors `r`.
    Order,
    /// Grid values are lower bounds `l` over clamped cosine similarities.
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalData {
    /// CSV with `f0..f{d-1}`, `label` and optional `superclass` columns.
    pub features: PathBuf,
    pub technique: Technique,
    /// Embedding text file; required for the lower-bound technique.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    /// Name of each class index. Defaults to the embedding file's names in
    /// file order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Seed of the generator and of the split permutation.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_split")]
    pub split: SplitFractions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal: Option<OrdinalParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouped: Option<GroupedParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external: Option<ExternalData>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

fn default_split() -> SplitFractions {
    SplitFractions {
        train: 0.6,
        validation: 0.2,
        test: 0.2,
    }
}

impl DataConfig {
    pub fn split_spec(&self) -> Result<SplitSpec> {
        SplitSpec::new(self.split.train, self.split.validation, self.split.test, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    pub patience: usize,
    pub max_epochs: usize,
    pub early_stop_metric: EarlyStopMetric,
    /// Hidden layer widths of the MLP.
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
}

fn default_learning_rate() -> f64 {
    0.001
}

fn default_batch_size() -> usize {
    128
}

fn default_hidden() -> Vec<usize> {
    vec![64, 64]
}

impl TrainSection {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            patience: self.patience,
            max_epochs: self.max_epochs,
            early_stop_metric: self.early_stop_metric,
            seed,
        }
    }
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

/// One experiment: a task, its data, a one-dimensional grid over the matrix
/// parameter, and the seeds every grid value is trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub data: DataConfig,
    pub grid: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub train: TrainSection,
    pub metrics: Vec<Metric>,
    /// Grid value treated as the cross-entropy reference. Defaults to 0.0
    /// for the order technique and the largest grid value otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn technique(&self) -> Technique {
        match self.task {
            Task::Ordinal => Technique::Order,
            Task::Grouped => Technique::LowerBound,
            Task::External => self
                .data
                .external
                .as_ref()
                .map_or(Technique::Order, |e| e.technique),
        }
    }

    pub fn baseline_value(&self) -> f64 {
        self.baseline.unwrap_or_else(|| match self.technique() {
            Technique::Order => 0.0,
            Technique::LowerBound => self.grid.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    pub fn baseline_index(&self) -> usize {
        let b = self.baseline_value();
        self.grid.iter().position(|&g| g == b).expect("validated")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        let d = &self.data;
        let (needed, present) = match self.task {
            Task::Ordinal => ("ordinal", d.ordinal.is_some()),
            Task::Grouped => ("grouped", d.grouped.is_some()),
            Task::External => ("external", d.external.is_some()),
        };
        if !present {
            return fail(format!("task {needed} needs a data.{needed} section"));
        }
        let sections = [d.ordinal.is_some(), d.grouped.is_some(), d.external.is_some()];
        if sections.iter().filter(|&&s| s).count() != 1 {
            return fail("data must contain exactly one of ordinal, grouped, external".into());
        }
        if let Some(ext) = &d.external {
            if ext.technique == Technique::LowerBound && ext.embeddings.is_none() {
                return fail("external lower-bound technique needs an embeddings file".into());
            }
        }
        d.split_spec().map_err(|e| Error::Config(e.to_string()))?;

        if self.grid.is_empty() {
            return fail("grid must not be empty".into());
        }
        for &g in &self.grid {
            if !(0.0..1.0).contains(&g) {
                return fail(format!("grid value {g} outside [0, 1)"));
            }
        }
        for (i, a) in self.grid.iter().enumerate() {
            if self.grid[..i].contains(a) {
                return fail(format!("grid value {a} repeated"));
            }
        }
        if self.seeds.is_empty() {
            return fail("seeds must not be empty".into());
        }
        if self.metrics.is_empty() {
            return fail("metrics must not be empty".into());
        }
        let baseline = self.baseline_value();
        if !self.grid.contains(&baseline) {
            return fail(format!("baseline {baseline} is not a grid value"));
        }
        if self.task == Task::Ordinal && self.metrics.iter().any(|m| m.needs_superclasses()) {
            return fail("superclass metrics need a task with superclasses".into());
        }
        if self.train.hidden.contains(&0) {
            return fail("hidden layer widths must be positive".into());
        }
        self.train
            .train_config(0)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORDINAL: &str = r#"{
        "task": "ordinal",
        "data": {"seed": 1, "ordinal": {"class_count": 5, "per_class": 10, "noise_sigma": 0.3}},
        "grid": [0.0, 0.5],
        "seeds": [1, 2],
        "train": {"patience": 2, "max_epochs": 5, "early_stop_metric": "validation_mae"},
        "metrics": ["accuracy", "mae"]
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json(ORDINAL).unwrap();
        assert_eq!(c.train.hidden, vec![64, 64]);
        assert_eq!(c.train.batch_size, 128);
        assert_eq!(c.train.learning_rate, 0.001);
        assert_eq!(c.data.split, default_split());
        assert_eq!(c.baseline_value(), 0.0);
        assert_eq!(c.technique(), Technique::Order);
        let back = ExperimentConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_unknown_keys() {
        let typo = ORDINAL.replace("\"seeds\"", "\"sedes\"");
        assert!(matches!(ExperimentConfig::from_json(&typo), Err(Error::Config(_))));
        let nested = ORDINAL.replace("\"patience\"", "\"patiense\"");
        assert!(matches!(ExperimentConfig::from_json(&nested), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_invalid_values() {
        for (from, to) in [
            ("[0.0, 0.5]", "[]"),
            ("[0.0, 0.5]", "[0.5, 1.0]"),
            ("[0.0, 0.5]", "[0.1, 0.5]"),
            ("\"seeds\": [1, 2]", "\"seeds\": []"),
            ("\"task\": \"ordinal\"", "\"task\": \"grouped\""),
            ("[\"accuracy\", \"mae\"]", "[\"accuracy\", \"fsa\"]"),
            ("\"patience\": 2", "\"patience\": 9"),
        ] {
            let bad = ORDINAL.replace(from, to);
            assert!(matches!(ExperimentConfig::from_json(&bad), Err(Error::Config(_))), "{to}");
        }
    }

    #[test]
    fn grouped_baseline_defaults_to_largest_bound() {
        let text = r#"{
            "task": "grouped",
            "data": {"grouped": {"group_count": 2, "classes_per_group": 2, "per_class": 5,
                     "embed_dim": 4, "within_sigma": 0.1, "feature_sigma": 0.1}},
            "grid": [0.0, 0.99, 0.5],
            "train": {"patience": 2, "max_epochs": 5, "early_stop_metric": "validation_accuracy"},
            "metrics": ["accuracy", "sa", "fsa"]
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.baseline_value(), 0.99);
        assert_eq!(c.baseline_index(), 1);
        assert_eq!(c.seeds, (0..10).collect::<Vec<_>>());
    }
}
