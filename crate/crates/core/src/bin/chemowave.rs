use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use chemotaxis_waves::config::ExperimentConfig;
use chemotaxis_waves::run::{self, ExitStatus};
use clap::{Parser, Subcommand};

/// Traveling-wave experiments for the chemotaxis system with logistic source.
#[derive(Parser, Debug)]
#[command(name = "chemowave", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file; built-in defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (defaults to `output.dir`, then `out-<mode>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Override a configuration value, e.g. `params.chi=0.05`. Repeatable.
    #[arg(long = "tol-override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Tabulate the admissible speed window over a range of chi.
    Speeds,
    /// Construct a traveling wave profile by fixed-point iteration.
    Wave,
    /// Evolve the coupled system in time.
    Evolve,
    /// Check the sub/super-solution inequalities of the envelope.
    Verify,
    /// Compute a principal eigenvalue and compare with its closed form.
    Eig,
    /// Run a parameter sweep in parallel.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Speeds => "speeds",
            Command::Wave => "wave",
            Command::Evolve => "evolve",
            Command::Verify => "verify",
            Command::Eig => "eig",
            Command::Sweep => "sweep",
        }
    }
}

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut overrides = cli.overrides.clone();
    overrides.push(format!("mode=\"{}\"", cli.command.name()));
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path, &overrides),
        None => ExperimentConfig::from_toml_with_overrides("", &overrides),
    };
    cfg.context("invalid configuration")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(ExitStatus::Usage.code() as u8);
        }
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("out-{}", cli.command.name())));
    match run::run(&cfg, &dir, cli.workers).with_context(|| format!("writing results to {}", dir.display())) {
        Ok(status) => {
            if status != ExitStatus::Pass {
                eprintln!(
                    "{} finished with status {status:?}; see {}",
                    cli.command.name(),
                    dir.display()
                );
            }
            ExitCode::from(status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ExitStatus::InvariantFailure.code() as u8)
        }
    }
}
