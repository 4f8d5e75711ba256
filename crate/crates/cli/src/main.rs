//! `neuroflip` CLI: run poisoning sweeps, generate synthetic datasets, and
//! explain single grid cells.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use neuroflip::attacks::PoisonScenario;
use neuroflip::dataio::{generate_synthetic, write_dataset_csv, SyntheticSpec};
use neuroflip::exec::Parallelism;
use neuroflip::explain::{aggregate_importance_by_electrode, importance_to_csv};
use neuroflip::harness::{
    run_single_cell, run_sweep, write_report, ExperimentConfig, ReportFormat,
};

#[derive(Parser)]
#[command(
    name = "neuroflip",
    about = "Label-flipping poisoning robustness harness for EEG-style risk classifiers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Experiment config file (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Metrics format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Force sequential execution (parallel and serial runs produce
    /// identical reports).
    #[arg(long)]
    serial: bool,
}

impl CommonOpts {
    fn load_config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)
                .with_context(|| format!("loading config {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    fn parallelism(&self) -> Parallelism {
        if self.serial {
            Parallelism::Sequential
        } else {
            Parallelism::default()
        }
    }

    fn format(&self) -> Result<ReportFormat> {
        Ok(self.format.parse::<ReportFormat>()?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full (model x scenario x rate) experiment grid.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate a synthetic dataset CSV.
    Generate {
        /// Output CSV path.
        #[arg(long, default_value = "synthetic.csv")]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        samples_per_class: usize,
        #[arg(long, default_value_t = 1.0)]
        noise_stddev: f64,
        /// Electrode whose class separation is widened (omit for none).
        #[arg(long, default_value = "Pz")]
        dominant_electrode: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Run one grid cell and print its metrics and importance report.
    Explain {
        #[command(flatten)]
        common: CommonOpts,
        /// Model name: adaboost or random_forest.
        #[arg(long)]
        model: String,
        /// Attack scenario: random or targeted (omit for the clean baseline).
        #[arg(long)]
        scenario: Option<String>,
        /// Poison rate in percent.
        #[arg(long, default_value_t = 0.0)]
        rate: f64,
    },
}

fn parse_scenario(name: &str) -> Result<PoisonScenario> {
    match name.to_ascii_lowercase().as_str() {
        "random" | "random_flip" => Ok(PoisonScenario::RandomFlip),
        "targeted" | "targeted_flip" => Ok(PoisonScenario::TargetedFlip),
        other => bail!("unknown scenario {other:?}; use random or targeted"),
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep { common } => {
            let cfg = common.load_config()?;
            let report = run_sweep(&cfg, common.parallelism())?;
            write_report(&report, &common.out, common.format()?)?;
            eprintln!(
                "sweep complete: {} cells -> {}",
                report.cells.len(),
                common.out.display()
            );
        }
        Command::Generate {
            out,
            samples_per_class,
            noise_stddev,
            dominant_electrode,
            seed,
        } => {
            let dominant = if dominant_electrode.eq_ignore_ascii_case("none")
                || dominant_electrode.is_empty()
            {
                None
            } else {
                Some(dominant_electrode)
            };
            let spec = SyntheticSpec::well_separated(samples_per_class, noise_stddev, dominant);
            let data = generate_synthetic(&spec, seed)?;
            write_dataset_csv(&data, &out)?;
            eprintln!("wrote {} rows to {}", data.len(), out.display());
        }
        Command::Explain {
            common,
            model,
            scenario,
            rate,
        } => {
            let cfg = common.load_config()?;
            let scenario = scenario.as_deref().map(parse_scenario).transpose()?;
            let cell = run_single_cell(&cfg, &model, scenario, rate, common.parallelism())?;
            let m = &cell.metrics;
            println!(
                "cell {}: accuracy {:.2}% recall {:.2}% precision {:.2}% f1 {:.2}% log_loss {:.3}",
                cell.id.file_stem(),
                m.accuracy,
                m.recall,
                m.precision,
                m.f1,
                m.log_loss
            );
            let schema = neuroflip::domain::FeatureSchema::default();
            println!("\nper-electrode importance:");
            for (electrode, score) in
                aggregate_importance_by_electrode(&cell.importance, &schema)?
            {
                println!("  {electrode:<4} {score:+.4}");
            }
            std::fs::create_dir_all(&common.out)
                .with_context(|| format!("creating {}", common.out.display()))?;
            let stem = cell.id.file_stem();
            std::fs::write(
                common.out.join(format!("{stem}.csv")),
                importance_to_csv(&cell.importance, &schema)?,
            )?;
            std::fs::write(
                common.out.join(format!("{stem}.json")),
                serde_json::to_string_pretty(&cell.importance)?,
            )?;
            eprintln!("\nwrote importance files to {}", common.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
