//! `superint`: simulate, verify and inspect the conformally deformed
//! superintegrable systems.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use superint_core::Family;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy)]
enum FamilySelection {
    One(Family),
    All,
}

impl FromStr for FamilySelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            return Ok(FamilySelection::All);
        }
        Family::from_str(s)
            .map(FamilySelection::One)
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "superint", version, about)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the `[verify]` seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; defaults to the config's `[output]` path, then stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Family name, or `all`. Replaces the config's family; without a config
    /// the default couplings for that family are used.
    #[arg(long, global = true)]
    family: Option<FamilySelection>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate from the config's initial state and write a CSV trajectory.
    Simulate,
    /// Run the full verification suite and write a JSON report.
    Verify,
    /// Print the bracket residual of every integral.
    Brackets,
    /// Print closed-form curvatures and the oracle deviation at positions.
    Curvature {
        /// Positions as `x,y,z`.
        #[arg(required = true, allow_hyphen_values = true, value_name = "X,Y,Z")]
        positions: Vec<String>,
    },
    /// Print the resolved configuration as TOML.
    Config,
}

impl Cli {
    fn configs(&self) -> Result<Vec<RunConfig>> {
        let base = self.config.as_deref().map(RunConfig::load).transpose()?;
        let mut configs = match (self.family, base) {
            (None, Some(c)) => vec![c],
            (None, None) => bail!("give --config or --family"),
            (Some(FamilySelection::One(f)), base) => vec![with_family(base, f)],
            (Some(FamilySelection::All), base) => Family::ALL
                .into_iter()
                .map(|f| with_family(base.clone(), f))
                .collect(),
        };
        if let Some(seed) = self.seed {
            for c in &mut configs {
                c.verify.seed = seed;
            }
        }
        Ok(configs)
    }
}

fn with_family(base: Option<RunConfig>, family: Family) -> RunConfig {
    match base {
        Some(mut c) => {
            c.system.family = family;
            c
        }
        None => RunConfig::default_for(family),
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let configs = cli.configs()?;
    let output = cli.output.clone().or_else(|| {
        configs
            .first()
            .and_then(|c| c.output_path())
            .map(PathBuf::from)
    });
    let output = output.as_deref();
    let is_all = matches!(cli.family, Some(FamilySelection::All));
    match &cli.command {
        Command::Simulate => {
            if is_all {
                bail!("simulate runs a single family");
            }
            commands::simulate(&configs[0], output)
        }
        Command::Verify => commands::verify(&configs, is_all, output),
        Command::Brackets => commands::brackets(&configs, output),
        Command::Curvature { positions } => {
            let positions = positions
                .iter()
                .map(|p| commands::parse_position(p))
                .collect::<Result<Vec<_>>>()?;
            commands::curvature(&configs, &positions, output)
        }
        Command::Config => commands::print_configs(&configs, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::EXIT_FAILURE)
        }
    }
}
