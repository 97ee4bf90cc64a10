use serde::{Deserialize, Serialize};

use super::{GridOutcome, Technique};
use crate::error::{Error, Result};
use crate::metrics::{mean_output_distribution, representative_class_count};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    pub grid_value: f64,
    /// Mean test-set output distribution, averaged over seeds.
    pub overall: Vec<f64>,
    /// Same, restricted to test examples of the target class.
    pub target: Vec<f64>,
    /// Spike count of each seed's overall distribution.
    pub spike_counts: Vec<usize>,
    pub mean_spike_count: f64,
    /// Spike count of the seed-averaged overall distribution.
    pub spike_count_of_mean: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionAnalysis {
    pub target_class: usize,
    pub threshold: f64,
    pub rows: Vec<AnalysisRow>,
}

impl DistributionAnalysis {
    pub fn mean_spike_counts(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean_spike_count).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn average(vectors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; vectors[0].len()];
    for v in vectors {
        out.iter_mut().zip(v).for_each(|(o, x)| *o += x);
    }
    out.iter_mut().for_each(|o| *o /= vectors.len() as f64);
    out
}

/// Mean output distributions and spike counts per grid value, measured on
/// the test split. Only meaningful for ordered classes, so the lower-bound
/// technique is refused.
pub fn analyze_distributions(outcome: &GridOutcome, target_class: usize, threshold: f64) -> Result<DistributionAnalysis> {
    let prepared = &outcome.prepared;
    if prepared.technique != Technique::Order {
        return Err(Error::Config(
            "distribution analysis needs ordered classes (order technique); spike counts are meaningless without class order".into(),
        ));
    }
    if target_class >= prepared.class_count {
        return Err(Error::Index {
            index: target_class,
            len: prepared.class_count,
        });
    }
    let test = &prepared.splits.test;
    let rows = prepared
        .config
        .grid
        .iter()
        .zip(&outcome.networks)
        .map(|(&grid_value, nets)| {
            let mut overall = Vec::with_capacity(nets.len());
            let mut target = Vec::with_capacity(nets.len());
            for net in nets {
                overall.push(mean_output_distribution(net, test.features(), test.labels(), None)?.to_vec());
                target.push(mean_output_distribution(net, test.features(), test.labels(), Some(target_class))?.to_vec());
            }
            let spike_counts: Vec<usize> = overall.iter().map(|d| representative_class_count(d, threshold)).collect();
            let mean_spike_count = spike_counts.iter().sum::<usize>() as f64 / spike_counts.len() as f64;
            let overall = average(&overall);
            Ok(AnalysisRow {
                grid_value,
                spike_count_of_mean: representative_class_count(&overall, threshold),
                overall,
                target: average(&target),
                spike_counts,
                mean_spike_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistributionAnalysis {
        target_class,
        threshold,
        rows,
    })
}
