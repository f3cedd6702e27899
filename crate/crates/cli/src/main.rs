use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cocreate_sim::commands::{cmd_compare, cmd_evaluate, cmd_ingest, cmd_sweep, cmd_train};
use cocreate_sim::{CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "cocreate-sim",
    version,
    about = "Train, evaluate and compare health-service resource policies"
)]
struct Cli {
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Replaces the configured seed list with a single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one policy per seed.
    Train(Common),
    /// Per-user totals of trained checkpoints.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to evaluate for every seed; defaults to the per-seed
        /// checkpoints in the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Adaptive policy against the fixed plans in every scenario.
    Compare(Common),
    /// Train and evaluate across a parameter grid.
    Sweep(Common),
    /// Fit user profiles and readiness correlations from a lifelog CSV.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Optional run configuration supplying `train_split`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    match cli.command {
        Command::Train(c) => cmd_train(&resolve(&c)?),
        Command::Evaluate { common, checkpoint } => {
            cmd_evaluate(&resolve(&common)?, checkpoint.as_deref())
        }
        Command::Compare(c) => cmd_compare(&resolve(&c)?).map(|r| r.0),
        Command::Sweep(c) => cmd_sweep(&resolve(&c)?).map(|r| r.0),
        Command::Ingest { input, config, out } => {
            let split = match &config {
                Some(p) => RunConfig::load(p)?.train_split,
                None => 0.8,
            };
            cmd_ingest(
                &input,
                &out.unwrap_or_else(|| PathBuf::from("ingest")),
                split,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(manifest) => {
            log::info!("wrote {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
