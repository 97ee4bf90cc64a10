use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use simloss::data::{synth_grouped, synth_ordinal, GroupedParams, OrdinalParams};
use simloss::harness::{analyze_distributions, emit_report, run_grid_with_models, ExperimentConfig, ReportFormat};
use simloss::metrics::DEFAULT_SPIKE_THRESHOLD;
use simloss::Error;

#[derive(Parser)]
#[command(name = "simloss", version, about = "Grid-search experiments for similarity-weighted cross entropy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Markdown,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenTask {
    Ordinal,
    Grouped,
}

#[derive(Subcommand)]
enum Command {
    /// Run the grid search and write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        format: Format,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the grid search and write mean output distributions per grid value.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        target_class: usize,
        #[arg(long, default_value_t = DEFAULT_SPIKE_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write a synthetic dataset as CSV (and embeddings for the grouped task).
    GenData {
        #[arg(long, value_enum)]
        task: GenTask,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        class_count: usize,
        #[arg(long, default_value_t = 200)]
        per_class: usize,
        #[arg(long, default_value_t = 0.5)]
        noise_sigma: f64,
        #[arg(long)]
        frequency_ratio: Option<f64>,
        #[arg(long, default_value_t = 5)]
        group_count: usize,
        #[arg(long, default_value_t = 4)]
        classes_per_group: usize,
        #[arg(long, default_value_t = 16)]
        embed_dim: usize,
        #[arg(long, default_value_t = 0.3)]
        within_sigma: f64,
        #[arg(long, default_value_t = 0.3)]
        feature_sigma: f64,
    },
}

enum Failure {
    Config(Error),
    Runtime(Error),
}

fn classify(e: Error) -> Failure {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) | Error::Parse { .. } => Failure::Config(e),
        other => Failure::Runtime(other),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            out,
            format,
            jobs,
        } => {
            let config = ExperimentConfig::load(&config).map_err(Failure::Config)?;
            let outcome = run_grid_with_models(&config, jobs).map_err(classify)?;
            for w in &outcome.report.meta.warnings {
                eprintln!("warning: {w}");
            }
            let format = match format {
                Format::Json => ReportFormat::Json,
                Format::Markdown => ReportFormat::Markdown,
                Format::Both => ReportFormat::Both,
            };
            for path in emit_report(&outcome.report, format, &out).map_err(Failure::Runtime)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Analyze {
            config,
            out,
            target_class,
            threshold,
            jobs,
        } => {
            let config = ExperimentConfig::load(&config).map_err(Failure::Config)?;
            let outcome = run_grid_with_models(&config, jobs).map_err(classify)?;
            let analysis = analyze_distributions(&outcome, target_class, threshold).map_err(classify)?;
            let mut written = emit_report(&outcome.report, ReportFormat::Json, &out).map_err(Failure::Runtime)?;
            let path = out.join("distributions.json");
            let json = analysis.to_json().map_err(Failure::Runtime)?;
            std::fs::write(&path, json).map_err(|e| Failure::Runtime(Error::Io { path: path.clone(), source: e }))?;
            written.push(path);
            for row in &analysis.rows {
                println!("{}: mean spike count {:.2}", row.grid_value, row.mean_spike_count);
            }
            for path in written {
                println!("wrote {}", path.display());
            }
        }
        Command::GenData {
            task,
            out,
            embeddings,
            seed,
            class_count,
            per_class,
            noise_sigma,
            frequency_ratio,
            group_count,
            classes_per_group,
            embed_dim,
            within_sigma,
            feature_sigma,
        } => match task {
            GenTask::Ordinal => {
                let params = OrdinalParams {
                    class_count,
                    per_class,
                    noise_sigma,
                    frequency_ratio,
                };
                let data = synth_ordinal(&params, seed).map_err(Failure::Config)?;
                data.write_csv(&out).map_err(Failure::Runtime)?;
                println!("wrote {} ({} examples)", out.display(), data.len());
            }
            GenTask::Grouped => {
                let params = GroupedParams {
                    group_count,
                    classes_per_group,
                    per_class,
                    embed_dim,
                    within_sigma,
                    feature_sigma,
                };
                let (data, table) = synth_grouped(&params, seed).map_err(Failure::Config)?;
                data.write_csv(&out).map_err(Failure::Runtime)?;
                println!("wrote {} ({} examples)", out.display(), data.len());
                if let Some(path) = embeddings {
                    table.write(&path).map_err(Failure::Runtime)?;
                    println!("wrote {}", path.display());
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
