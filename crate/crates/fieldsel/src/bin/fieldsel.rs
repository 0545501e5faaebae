//! Experiment CLI: `variance`, `slope` and `risk-ratio` runs driven by a
//! config file, writing CSV tables, plot scripts and metadata sidecars.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fieldsel::bench::{self, emit_outputs, ExperimentConfig, ExperimentOutput};
use fieldsel::model_file;
use fieldsel::risk::LossKind;
use fieldsel::Error;

#[derive(Parser)]
#[command(
    name = "fieldsel",
    version,
    about = "Neighborhood-selection experiments on discrete random fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    L2,
    Kl,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV tables, plot scripts and sidecars.
    #[arg(long)]
    out: PathBuf,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Override the config's loss.
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Scaled variance terms per sample size and replica.
    Variance(RunArgs),
    /// One seeded penalty sweep with jump detection.
    Slope(RunArgs),
    /// Oracle, slope-calibrated and theoretical-constant risks per replica.
    RiskRatio(RunArgs),
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse { .. } | Error::Io { .. } | Error::Validation(_) | Error::Capacity(_)
    )
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = bench::load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(loss) = args.loss {
        cfg.loss = match loss {
            LossArg::L2 => LossKind::L2,
            LossArg::Kl => LossKind::Kullback,
        };
    }
    Ok(cfg)
}

fn run(command: &Command) -> Result<(), (u8, Error)> {
    let args = match command {
        Command::Variance(a) | Command::Slope(a) | Command::RiskRatio(a) => a,
    };
    let cfg = load(args).map_err(|e| (2, e))?;
    let model = model_file::load_model(&cfg.model_path).map_err(|e| (2, e))?;
    model.validate().map_err(|e| (2, e))?;

    let output: ExperimentOutput = match command {
        Command::Variance(_) => bench::run_variance_experiment(&model, &cfg, args.workers),
        Command::Slope(_) => bench::run_slope_figure(&model, &cfg, args.workers),
        Command::RiskRatio(_) => bench::run_risk_ratio(&model, &cfg, args.workers),
    }
    .map_err(|e| {
        let code = if is_config_error(&e) { 2 } else { 3 };
        (code, e)
    })?;

    for table in &output.tables {
        let written = emit_outputs(table, &args.out).map_err(|e| (3, e))?;
        for path in written {
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, e)) => {
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
