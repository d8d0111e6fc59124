//! Batch front-end for the gravwave solver: configuration, run orchestration
//! and persistent output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod persist;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{parse_resolution, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "gravwave", version, about = "Steady periodic gravity waves with vorticity")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output` in the config; default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Checkpoint to resume a continuation from.
    #[arg(long, global = true)]
    pub resume: Option<PathBuf>,
    /// Run both half-branches into `plus/` and `minus/`.
    #[arg(long, global = true)]
    pub both_half_branches: bool,
    /// Override the truncation as `N,M`.
    #[arg(long, global = true, value_parser = parse_resolution)]
    pub resolution: Option<(usize, usize)>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep laminar flows over lambda.
    Laminar,
    /// Tabulate the dispersion relation and its roots.
    Dispersion,
    /// Locate bifurcation points.
    Bifurcate,
    /// Continue a branch from a bifurcation point or a checkpoint.
    Continue,
    /// Verify a persisted state.
    Check {
        /// State file written by `continue`.
        state: PathBuf,
    },
}

fn load_config(cli: &Cli) -> CliResult<Option<RunConfig>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let mut cfg = RunConfig::load(path)?;
    if let Some((n, m)) = cli.resolution {
        cfg.numerics.order = n;
        cfg.numerics.rows = m;
        cfg.validate()?;
    }
    Ok(Some(cfg))
}

fn require(cfg: Option<RunConfig>) -> CliResult<RunConfig> {
    cfg.ok_or_else(|| CliError::Config("--config is required for this command".into()))
}

/// Runs the parsed command; the returned text goes to stdout.
pub fn run(cli: &Cli) -> CliResult<String> {
    let cfg = load_config(cli)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().and_then(|c| c.output.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let listing = |paths: Vec<PathBuf>| paths.iter().map(|p| format!("wrote {}\n", p.display())).collect::<String>();
    match &cli.command {
        Command::Laminar => Ok(listing(vec![commands::cmd_laminar(&require(cfg)?, &out)?])),
        Command::Dispersion => Ok(listing(commands::cmd_dispersion(&require(cfg)?, &out)?)),
        Command::Bifurcate => Ok(listing(commands::cmd_bifurcate(&require(cfg)?, &out)?)),
        Command::Continue => {
            let summaries = commands::cmd_continue(cfg.as_ref(), &out, cli.both_half_branches, cli.resume.as_deref())?;
            let mut text = String::new();
            for s in summaries {
                text.push_str(&format!("verdict {} after {} points\n", s["verdict"].as_str().unwrap_or("?"), s["points"]));
            }
            Ok(text)
        }
        Command::Check { state } => {
            let dir = cli.out.as_deref();
            Ok(commands::cmd_check(state, dir)?.0)
        }
    }
}
