//! Thin CLI over the experiment harness.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ggh::experiment::{export_embeddings, run_experiment, simulate, ExperimentConfig, Method};
use ggh::error::{Error, Result};

#[derive(Parser)]
#[command(name = "ggh", version, about = "Gradient-guided hypothesis experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's run count.
    #[arg(long)]
    runs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the simulated dataset plus sidecar truth, split, and mask files.
    Simulate(CommonArgs),
    /// Run the imputation-mode comparison (guided training plus roster).
    ImputeTrain(CommonArgs),
    /// Run the noise-mode comparison (noise filter plus roster).
    NoiseFilter(CommonArgs),
    /// Run only the baseline methods of the roster.
    Baseline(CommonArgs),
    /// Run one guided pass and export embeddings/histogram/history.
    ExportEmbeddings(CommonArgs),
    /// Run whatever the config describes and write the report.
    Report(CommonArgs),
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_and_report(cfg: &ExperimentConfig, out_dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let report = run_experiment(cfg)?;
    report.write_csv(out_dir.join("report.csv"))?;
    report.write_json(out_dir.join("report.json"))?;
    print!("{}", report.render_table());
    println!("report written to {}", out_dir.display());
    if report.methods.iter().any(|m| m.incomplete) {
        return Err(Error::Run("some runs failed; see report diagnostics".into()));
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = load_config(&args)?;
            simulate(&cfg, &args.out_dir)?;
            println!("simulation written to {}", args.out_dir.display());
            Ok(())
        }
        Command::ImputeTrain(args) => {
            let cfg = load_config(&args)?;
            if !cfg.mode.is_imputation() {
                return Err(Error::Config(
                    "impute-train needs an imputation-mode config".into(),
                ));
            }
            run_and_report(&cfg, &args.out_dir)
        }
        Command::NoiseFilter(args) => {
            let cfg = load_config(&args)?;
            if cfg.mode.is_imputation() {
                return Err(Error::Config(
                    "noise-filter needs a noise-mode config".into(),
                ));
            }
            run_and_report(&cfg, &args.out_dir)
        }
        Command::Baseline(args) => {
            let mut cfg = load_config(&args)?;
            let roster: Vec<Method> = cfg
                .roster()
                .into_iter()
                .filter(|m| !matches!(m, Method::Ggh | Method::GghNoiseFilter))
                .collect();
            if roster.is_empty() {
                return Err(Error::Config("roster has no baseline methods".into()));
            }
            cfg.methods = roster;
            run_and_report(&cfg, &args.out_dir)
        }
        Command::ExportEmbeddings(args) => {
            let cfg = load_config(&args)?;
            export_embeddings(&cfg, &args.out_dir)?;
            println!("embeddings written to {}", args.out_dir.display());
            Ok(())
        }
        Command::Report(args) => {
            let cfg = load_config(&args)?;
            run_and_report(&cfg, &args.out_dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
