//! Evaluation metrics, the Wilcoxon signed-rank test, and output-distribution
//! analysis.

use std::fmt;

use ndarray::{Array1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LabelBatch;
use crate::model::DenseNet;

/// Maps every class index to a superclass index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperclassMap(Vec<usize>);

impl SuperclassMap {
    pub fn new(mapping: Vec<usize>) -> Self {
        Self(mapping)
    }

    pub fn class_count(&self) -> usize {
        self.0.len()
    }

    pub fn superclass_count(&self) -> usize {
        self.0.iter().max().map_or(0, |m| m + 1)
    }

    pub fn get(&self, class: usize) -> Result<usize> {
        self.0.get(class).copied().ok_or(Error::Index {
            index: class,
            len: self.0.len(),
        })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

fn check_pair(predictions: &LabelBatch, targets: &LabelBatch) -> Result<()> {
    if predictions.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} predictions but {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if targets.is_empty() {
        return Err(Error::Data("no examples to evaluate".into()));
    }
    Ok(())
}

fn pairs<'a>(predictions: &'a LabelBatch, targets: &'a LabelBatch) -> impl Iterator<Item = (usize, usize)> + 'a {
    predictions.as_slice().iter().copied().zip(targets.as_slice().iter().copied())
}

pub fn accuracy(predictions: &LabelBatch, targets: &LabelBatch) -> Result<f64> {
    check_pair(predictions, targets)?;
    let hits = pairs(predictions, targets).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / targets.len() as f64)
}

/// Mean absolute error with class indices read as ordinal values.
pub fn mae(predictions: &LabelBatch, targets: &LabelBatch) -> Result<f64> {
    check_pair(predictions, targets)?;
    let total: f64 = pairs(predictions, targets).map(|(p, t)| p.abs_diff(t) as f64).sum();
    Ok(total / targets.len() as f64)
}

pub fn mse(predictions: &LabelBatch, targets: &LabelBatch) -> Result<f64> {
    check_pair(predictions, targets)?;
    let total: f64 = pairs(predictions, targets)
        .map(|(p, t)| (p.abs_diff(t) as f64).powi(2))
        .sum();
    Ok(total / targets.len() as f64)
}

/// Fraction of examples whose prediction lands in the target's superclass.
pub fn superclass_accuracy(predictions: &LabelBatch, targets: &LabelBatch, map: &SuperclassMap) -> Result<f64> {
    check_pair(predictions, targets)?;
    let mut hits = 0;
    for (p, t) in pairs(predictions, targets) {
        if map.get(p)? == map.get(t)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / targets.len() as f64)
}

/// Superclass accuracy over misclassified examples only.
///
/// Returns `Ok(None)` when nothing was misclassified: the metric is
/// undefined there, which is not the same as 0 or 1.
pub fn failed_superclass_accuracy(predictions: &LabelBatch, targets: &LabelBatch, map: &SuperclassMap) -> Result<Option<f64>> {
    check_pair(predictions, targets)?;
    let mut misses = 0;
    let mut hits = 0;
    for (p, t) in pairs(predictions, targets).filter(|(p, t)| p != t) {
        misses += 1;
        if map.get(p)? == map.get(t)? {
            hits += 1;
        }
    }
    Ok((misses > 0).then(|| hits as f64 / misses as f64))
}

/// Metric names used in configs and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Accuracy,
    Mae,
    Mse,
    Sa,
    Fsa,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Accuracy, Metric::Mae, Metric::Mse, Metric::Sa, Metric::Fsa];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Mae => "mae",
            Metric::Mse => "mse",
            Metric::Sa => "sa",
            Metric::Fsa => "fsa",
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::Accuracy | Metric::Sa | Metric::Fsa)
    }

    pub fn needs_superclasses(self) -> bool {
        matches!(self, Metric::Sa | Metric::Fsa)
    }

    /// `Ok(None)` only for an undefined FSA.
    pub fn evaluate(self, predictions: &LabelBatch, targets: &LabelBatch, map: Option<&SuperclassMap>) -> Result<Option<f64>> {
        let need_map = || map.ok_or_else(|| Error::Data(format!("metric {} needs a superclass map", self.name())));
        match self {
            Metric::Accuracy => accuracy(predictions, targets).map(Some),
            Metric::Mae => mae(predictions, targets).map(Some),
            Metric::Mse => mse(predictions, targets).map(Some),
            Metric::Sa => superclass_accuracy(predictions, targets, need_map()?).map(Some),
            Metric::Fsa => failed_superclass_accuracy(predictions, targets, need_map()?),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Paired per-run values of two systems.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSamples {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PairedSamples {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Shape(format!("paired samples of lengths {} and {}", a.len(), b.len())));
        }
        if a.is_empty() {
            return Err(Error::Data("paired samples are empty".into()));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("paired samples must be finite".into()));
        }
        Ok(Self { a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `a - b` per pair.
    pub fn differences(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(a, b)| a - b).collect()
    }
}

/// Which sample has the larger mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AHigher,
    BHigher,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApproximation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub p_value: f64,
    pub significant: bool,
    pub direction: Direction,
    /// Sum of ranks of the positive differences.
    pub statistic: f64,
    /// Pairs remaining after zero differences are dropped.
    pub n: usize,
    pub method: WilcoxonMethod,
}

/// Largest reduced sample size handled by the exact null distribution.
pub const EXACT_MAX_N: usize = 20;

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Average ranks of `values` (ascending, 1-based), doubled so ties stay
/// integral: a tie block over positions `i..=j` gets `i + j`.
pub fn doubled_average_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    let mut ranks = vec![0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let doubled = (start + 1 + end + 1) as u64;
        for &idx in &order[start..=end] {
            ranks[idx] = doubled;
        }
        start = end + 1;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank test on `a - b`.
///
/// Zero differences are dropped and tied magnitudes get average ranks. Up to
/// [`EXACT_MAX_N`] remaining pairs the p-value comes from the exact null
/// distribution over all sign assignments; beyond that a normal
/// approximation with tie-corrected variance (no continuity correction) is
/// used.
pub fn wilcoxon_signed_rank(samples: &PairedSamples, alpha: f64) -> Result<WilcoxonResult> {
    let all_diffs = samples.differences();
    let mean_diff = all_diffs.iter().sum::<f64>() / all_diffs.len() as f64;
    let diffs: Vec<f64> = all_diffs.into_iter().filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(Error::NoTestPossible);
    }
    let n = diffs.len();
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = doubled_average_ranks(&magnitudes);
    let w_plus: u64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();

    let (p_value, method) = if n <= EXACT_MAX_N {
        (exact_p_value(&ranks, w_plus), WilcoxonMethod::Exact)
    } else {
        (normal_p_value(&ranks, w_plus), WilcoxonMethod::NormalApproximation)
    };
    let direction = if mean_diff > 0.0 {
        Direction::AHigher
    } else if mean_diff < 0.0 {
        Direction::BHigher
    } else {
        Direction::None
    };
    Ok(WilcoxonResult {
        p_value,
        significant: p_value < alpha,
        direction,
        statistic: w_plus as f64 / 2.0,
        n,
        method,
    })
}

/// Exact two-sided p-value: the null distribution of the (doubled) positive
/// rank sum is built by counting subsets, one rank at a time.
fn exact_p_value(doubled_ranks: &[u64], w_plus: u64) -> f64 {
    let total: u64 = doubled_ranks.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    let w = w_plus as usize;
    let lower: u64 = counts[..=w].iter().sum();
    let upper: u64 = counts[w..].iter().sum();
    let assignments = (1u64 << doubled_ranks.len()) as f64;
    (2.0 * lower.min(upper) as f64 / assignments).min(1.0)
}

fn normal_p_value(doubled_ranks: &[u64], w_plus: u64) -> f64 {
    let n = doubled_ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = doubled_ranks.to_vec();
    sorted.sort_unstable();
    for block in sorted.chunk_by(|a, b| a == b) {
        let t = block.len() as f64;
        tie_term += t * t * t - t;
    }
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let z = (w_plus as f64 / 2.0 - mean) / variance.sqrt();
    // two-sided tail of the standard normal: 2 * (1 - Phi(|z|)) = erfc(|z| / sqrt 2)
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Mean softmax output over the selected examples. With `target_filter`,
/// only examples whose label equals it are included.
pub fn mean_output_distribution(
    net: &DenseNet,
    features: ArrayView2<'_, f64>,
    labels: &[usize],
    target_filter: Option<usize>,
) -> Result<Array1<f64>> {
    if labels.len() != features.nrows() {
        return Err(Error::Shape(format!(
            "{} feature rows but {} labels",
            features.nrows(),
            labels.len()
        )));
    }
    let selected: Vec<usize> = match target_filter {
        Some(target) => (0..labels.len()).filter(|&i| labels[i] == target).collect(),
        None => (0..labels.len()).collect(),
    };
    if selected.is_empty() {
        return Err(Error::Data("no examples selected for the output distribution".into()));
    }
    let subset = features.select(Axis(0), &selected);
    let probs = net.predict_proba(subset.view())?;
    Ok(probs.view().mean_axis(Axis(0)).expect("non-empty selection"))
}

pub const DEFAULT_SPIKE_THRESHOLD: f64 = 0.01;

/// Number of strict local maxima above `threshold`. Boundary entries need
/// only exceed their single neighbour.
pub fn representative_class_count(distribution: &[f64], threshold: f64) -> usize {
    let c = distribution.len();
    (0..c)
        .filter(|&i| {
            let v = distribution[i];
            let left = i == 0 || v > distribution[i - 1];
            let right = i + 1 == c || v > distribution[i + 1];
            left && right && v > threshold && c > 1
        })
        .count()
}
