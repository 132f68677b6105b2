//! `windroute` command line: wind fusion on a grid, leave-one-aircraft-out
//! scoring, routing experiments and synthetic data generation.

pub mod commands;
pub mod config;
pub mod error;
mod fsio;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use windroute_core::sim::Policy;
use windroute_core::windmodel::LooMethod;

use config::{FuseMethod, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "windroute", version, about = "Wind fusion and wind-aware routing experiments")]
pub struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(short, long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set model.signal_sd_kt=40`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory (overrides `output.dir`).
    #[arg(short, long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long, value_name = "FILE")]
    pub bulletin: Option<PathBuf>,
    /// Station directory CSV.
    #[arg(long, value_name = "FILE")]
    pub stations: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub aircraft: Option<PathBuf>,
    /// Bulletin level to use, ft.
    #[arg(long, value_name = "FT")]
    pub level: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Posterior wind mean and sd on a lat/lon grid.
    Fuse {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_parser = parse_fuse_method)]
        method: Option<FuseMethod>,
    },
    /// Leave-one-aircraft-out ground-speed RMSE per method.
    Loo {
        #[command(flatten)]
        data: DataArgs,
        /// Score a single method instead of the configured list.
        #[arg(long)]
        method: Option<LooMethod>,
    },
    /// Fly every policy over repeated wind worlds and report mean times.
    Simulate {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        repetitions: Option<usize>,
        /// Restrict to these policies. Repeatable.
        #[arg(long)]
        policy: Vec<Policy>,
    },
    /// Write a seeded synthetic bulletin, station directory and aircraft table.
    GenSynthetic {
        #[arg(long)]
        seed: Option<u64>,
        /// Noise-free world in which every estimator can be exact.
        #[arg(long)]
        self_consistent: bool,
    },
}

fn parse_fuse_method(s: &str) -> Result<FuseMethod, String> {
    match s {
        "laplace" => Ok(FuseMethod::Laplace),
        "gpr" => Ok(FuseMethod::Gpr),
        other => Err(format!("unknown method {other:?} (expected laplace or gpr)")),
    }
}

impl DataArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = &self.bulletin {
            cfg.data.bulletin = Some(p.clone());
        }
        if let Some(p) = &self.stations {
            cfg.data.stations = Some(p.clone());
        }
        if let Some(p) = &self.aircraft {
            cfg.data.aircraft = Some(p.clone());
        }
        if let Some(l) = self.level {
            cfg.data.level_ft = l;
        }
    }
}

/// Loads the config, applies flags (flags win over the file and `--set`),
/// validates, and runs the command.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    match &cli.command {
        Command::Fuse { data, method } => {
            data.apply(&mut cfg);
            if let Some(m) = method {
                cfg.fuse.method = *m;
            }
        }
        Command::Loo { data, method } => {
            data.apply(&mut cfg);
            if let Some(m) = method {
                cfg.loo.methods = vec![*m];
            }
        }
        Command::Simulate {
            seed,
            repetitions,
            policy,
        } => {
            if let Some(s) = seed {
                cfg.experiment.base_seed = *s;
            }
            if let Some(r) = repetitions {
                cfg.experiment.repetitions = *r;
            }
            if !policy.is_empty() {
                cfg.experiment.policies = policy.clone();
            }
        }
        Command::GenSynthetic { seed, self_consistent } => {
            if let Some(s) = seed {
                cfg.experiment.base_seed = *s;
            }
            if *self_consistent {
                cfg.synthetic.self_consistent = true;
            }
        }
    }
    cfg.validate()?;

    match &cli.command {
        Command::Fuse { .. } => {
            for p in commands::cmd_fuse(&cfg)? {
                println!("{}", p.display());
            }
        }
        Command::Loo { .. } => print!("{}", commands::cmd_loo(&cfg)?),
        Command::Simulate { .. } => {
            let outcome = commands::cmd_simulate(&cfg)?;
            print!("{}", windroute_core::sim::output::report_csv(&outcome.report));
        }
        Command::GenSynthetic { .. } => {
            for p in commands::cmd_gen_synthetic(&cfg)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}
