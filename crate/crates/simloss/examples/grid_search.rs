//! Runs a small grid from a config file (default: a reduced ordinal grid)
//! and writes report.json and report.md.
//!
//!     cargo run --release --example grid_search -- configs/ordinal.json out/

use std::env;

use simloss::harness::{emit_report, run_grid, ExperimentConfig, ReportFormat};

const SMALL: &str = r#"{
    "task": "ordinal",
    "data": {"seed": 1, "ordinal": {"class_count": 10, "per_class": 60, "noise_sigma": 0.5}},
    "grid": [0.0, 0.3, 0.6],
    "seeds": [0, 1, 2, 3, 4, 5],
    "train": {"patience": 5, "max_epochs": 30, "early_stop_metric": "validation_mae", "hidden": [32]},
    "metrics": ["accuracy", "mae", "mse"]
}"#;

fn main() -> simloss::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let config = match args.first() {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::from_json(SMALL)?,
    };
    let out = args.get(1).map_or_else(|| env::temp_dir().join("simloss-grid"), Into::into);
    let report = run_grid(&config)?;
    for path in emit_report(&report, ReportFormat::Both, &out)? {
        println!("wrote {}", path.display());
    }
    print!("{}", simloss::harness::render_markdown(&report));
    Ok(())
}
