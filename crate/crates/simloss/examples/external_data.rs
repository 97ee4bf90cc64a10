//! Feeds externally prepared features and embeddings through the harness.
//! One class has no embedding and is dropped.

use std::fs;

use simloss::data::{synth_grouped, GroupedParams};
use simloss::harness::{run_grid, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("simloss-external");
    fs::create_dir_all(&dir)?;
    let params = GroupedParams {
        group_count: 3,
        classes_per_group: 3,
        per_class: 40,
        embed_dim: 6,
        within_sigma: 0.3,
        feature_sigma: 0.4,
    };
    let (data, table) = synth_grouped(&params, 5)?;
    data.write_csv(dir.join("features.csv"))?;
    let all: Vec<usize> = (0..table.len()).collect();
    let partial = table.select(&all[..all.len() - 1])?;
    partial.write(dir.join("embeddings.txt"))?;

    let names: Vec<String> = table.names().to_vec();
    let config = format!(
        r#"{{
            "task": "external",
            "data": {{"seed": 1, "external": {{
                "features": {:?}, "embeddings": {:?}, "technique": "lower_bound", "class_names": {}
            }}}},
            "grid": [0.0, 0.5, 0.99],
            "seeds": [0, 1, 2, 3],
            "train": {{"patience": 5, "max_epochs": 30, "early_stop_metric": "validation_accuracy", "hidden": [16]}},
            "metrics": ["accuracy", "sa", "fsa"]
        }}"#,
        dir.join("features.csv"),
        dir.join("embeddings.txt"),
        serde_json::to_string(&names)?
    );
    let report = run_grid(&ExperimentConfig::from_json(&config)?)?;
    println!("dropped classes: {:?}", report.meta.dropped_classes);
    print!("{}", simloss::harness::render_markdown(&report));
    Ok(())
}
