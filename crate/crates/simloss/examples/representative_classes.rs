//! Mean output distributions per reduction factor and their spike counts.

use simloss::harness::{analyze_distributions, run_grid_with_models, ExperimentConfig};
use simloss::metrics::DEFAULT_SPIKE_THRESHOLD;

const CONFIG: &str = r#"{
    "task": "ordinal",
    "data": {"seed": 2, "ordinal": {"class_count": 20, "per_class": 60, "noise_sigma": 0.5, "frequency_ratio": 0.95}},
    "grid": [0.0, 0.5, 0.9],
    "seeds": [0, 1, 2],
    "train": {"patience": 5, "max_epochs": 40, "early_stop_metric": "validation_mae", "hidden": [32, 32]},
    "metrics": ["accuracy", "mae"]
}"#;

fn main() -> simloss::Result<()> {
    let outcome = run_grid_with_models(&ExperimentConfig::from_json(CONFIG)?, None)?;
    let analysis = analyze_distributions(&outcome, 10, DEFAULT_SPIKE_THRESHOLD)?;
    for row in &analysis.rows {
        let bars: String = row
            .overall
            .iter()
            .map(|p| match (p * 100.0) as u32 {
                0 => ' ',
                1..=3 => '.',
                4..=7 => ':',
                _ => '#',
            })
            .collect();
        println!("r = {:<4} |{bars}| spikes {:.1}", row.grid_value, row.mean_spike_count);
    }
    Ok(())
}
