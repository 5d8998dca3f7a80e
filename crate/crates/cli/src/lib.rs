//! Command-line driver: configuration, output files, checkpoints and manifests around the
//! `dstorus` core.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod initial;
pub mod manifest;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{ExactArgs, ExactCase, FitArgs, Global, RunArgs};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "dstorus", version, about = "Davey-Stewartson solver and estimate probes on rescaled tori")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; must not already hold a manifest.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one configured run.
    Run(RunCmd),
    /// Run the cartesian product of the `[sweep]` axes.
    Sweep,
    /// Residuals and norm curves of a closed-form solution.
    Exact(ExactCmd),
    /// Monte-Carlo probes of the `[lab]` section.
    Strichartz,
    /// Fit `C (T - t)^(-p)` to a CSV column.
    Fit(FitCmd),
}

#[derive(Debug, Args)]
pub struct RunCmd {
    /// Write a checkpoint every N sample intervals.
    #[arg(long, value_name = "N")]
    pub checkpoint_every: Option<u64>,
    /// Continue from a checkpoint file.
    #[arg(long, value_name = "PATH")]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CaseArg {
    Hypnls,
    Ozawa,
    Stationary,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CheckArg {
    Residual,
}

#[derive(Debug, Args)]
pub struct ExactCmd {
    #[arg(long, value_enum)]
    pub case: CaseArg,
    #[arg(long, value_enum)]
    pub check: Option<CheckArg>,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    /// Log-spaced sample times for the blow-up family.
    #[arg(long, default_value_t = 40)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct FitCmd {
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub column: Option<String>,
    /// Only fit rows with `t >= FROM`.
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second build in the same process keeps the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let global = Global { config: cli.config, out: cli.out, seed: cli.seed, threads: cli.threads };
    match cli.command {
        Command::Run(a) => commands::run(&global, &RunArgs { checkpoint_every: a.checkpoint_every, resume: a.resume }),
        Command::Sweep => commands::sweep(&global),
        Command::Exact(a) => {
            let case = match a.case {
                CaseArg::Hypnls => ExactCase::Hypnls,
                CaseArg::Ozawa => ExactCase::Ozawa,
                CaseArg::Stationary => ExactCase::Stationary,
            };
            let args = ExactArgs { case, check_residual: a.check.is_some(), tolerance: a.tolerance, samples: a.samples };
            commands::exact(&global, &args)
        }
        Command::Strichartz => commands::strichartz(&global),
        Command::Fit(a) => commands::fit(&global, &FitArgs { input: a.input, s: a.s, column: a.column, from: a.from, to: a.to }),
    }
}
