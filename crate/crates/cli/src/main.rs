//! `impostor`: run the impersonator pipeline stage by stage.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;
use crate::config::Config;
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "impostor",
    version,
    about = "Impersonator detection and post classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for outputs and the run manifest. Inputs that are not
    /// configured explicitly are read from here too.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset.
    Synth(Common),
    /// Score candidate profiles against the genuine accounts.
    Identify(Common),
    /// Cluster impersonators into fans and bots.
    Cluster(Common),
    /// Train the post classifier.
    Train(Common),
    /// Compare the forest baseline and both network variants.
    Eval(Common),
    /// Classify posts with a trained model.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Posts to classify, one JSON record per line.
        #[arg(long)]
        input: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Identify(_) => "identify",
            Command::Cluster(_) => "cluster",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Predict { .. } => "predict",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Synth(c)
            | Command::Identify(c)
            | Command::Cluster(c)
            | Command::Train(c)
            | Command::Eval(c) => c,
            Command::Predict { common, .. } => common,
        }
    }
}

fn run(cmd: Command) -> Result<(), CliError> {
    let common = cmd.common().clone();
    let mut config = Config::load(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        config.apply_seed(seed);
    }
    let mut ctx = Context::new(cmd.name(), config, common.out_dir)?;
    match &cmd {
        Command::Synth(_) => commands::synth(&mut ctx)?,
        Command::Identify(_) => commands::identify(&mut ctx)?,
        Command::Cluster(_) => commands::cluster(&mut ctx)?,
        Command::Train(_) => commands::train(&mut ctx)?,
        Command::Eval(_) => print!("{}", commands::eval(&mut ctx)?),
        Command::Predict { input, .. } => commands::predict(&mut ctx, input)?,
    }
    let manifest = ctx.finish()?;
    log::info!("manifest written to {}", manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
