//! `midpoint` binary: train, evaluate, compare, oracle-check, and plot
//! geodesic-generation experiments.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 invalid configuration,
//! 3 numeric abort (a non-finite loss or gradient stopped training).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use midpoint_cli::commands::{
    self, CompareArgs, EvalArgs, OracleArgs, PairsArgs, PlotArgs, TrainArgs,
};
use midpoint_cli::config::ConfigError;
use midpoint_core::error::CoreError;

#[derive(Parser)]
#[command(
    name = "midpoint",
    about = "Geodesic path generation by recursive midpoint prediction",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy and write checkpoints, logs and reports.
    Train {
        /// Experiment configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: $MIDPOINT_OUT_ROOT or ./runs,
        /// plus a per-run subdirectory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's training seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Resume from a previously written checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on a fixed endpoint pair set.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Pair-set CSV (default: regenerate from the config).
        #[arg(long)]
        pairs: Option<PathBuf>,
        /// Override the tree depth (segments = 2^depth).
        #[arg(long)]
        depth: Option<u32>,
        /// Write the evaluation report CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render the first pairs' paths as SVG (planar only).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Compare two evaluation reports (winning-rate table).
    Compare {
        /// First evaluation report CSV.
        #[arg(long = "a")]
        report_a: PathBuf,
        /// Second evaluation report CSV.
        #[arg(long = "b")]
        report_b: PathBuf,
        /// Write the text table here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a CSV version of the table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check the finite-set midpoint iteration against an exact
    /// reference distance.
    Oracle {
        /// Fixture: analytic1d or euclid2d.
        #[arg(long, default_value = "analytic1d")]
        fixture: String,
        /// Node count (analytic1d: total; euclid2d: per side).
        #[arg(long)]
        nodes: Option<usize>,
        /// Value-iteration sweep budget.
        #[arg(long, default_value_t = 64)]
        iters: u32,
        /// Pass tolerance (default 0.03 analytic1d, 1e-9 euclid2d).
        #[arg(long)]
        tolerance: Option<f64>,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the per-iteration CSV trajectory here.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Render generated paths for a planar environment as SVG.
    Plot {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Pair-set CSV (default: regenerate from the config).
        #[arg(long)]
        pairs: Option<PathBuf>,
        /// How many pairs to draw.
        #[arg(long, default_value_t = 6)]
        count: usize,
        /// Override the tree depth (segments = 2^depth).
        #[arg(long)]
        depth: Option<u32>,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate and persist the fixed evaluation pair set of a config.
    Pairs {
        #[arg(long)]
        config: PathBuf,
        /// Output pair-set CSV.
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { config, out, seed, resume } => commands::cmd_train(TrainArgs {
            config,
            out,
            seed,
            resume,
        }),
        Command::Eval { config, checkpoint, pairs, depth, out, svg } => {
            commands::cmd_eval(EvalArgs {
                config,
                checkpoint,
                pairs,
                depth,
                out,
                svg,
            })
        }
        Command::Compare { report_a, report_b, out, csv } => commands::cmd_compare(CompareArgs {
            report_a,
            report_b,
            out,
            csv,
        }),
        Command::Oracle { fixture, nodes, iters, tolerance, out, trajectory } => {
            commands::cmd_oracle(OracleArgs {
                fixture,
                nodes,
                iters,
                tolerance,
                out,
                trajectory,
            })
        }
        Command::Plot { config, checkpoint, pairs, count, depth, out } => {
            commands::cmd_plot(PlotArgs {
                config,
                checkpoint,
                pairs,
                count,
                depth,
                out,
            })
        }
        Command::Pairs { config, out } => commands::cmd_pairs(PairsArgs { config, out }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = if err.chain().any(|c| c.downcast_ref::<ConfigError>().is_some()) {
                2
            } else if err
                .chain()
                .any(|c| matches!(c.downcast_ref::<CoreError>(), Some(CoreError::NonFinite(_))))
            {
                3
            } else {
                1
            };
            ExitCode::from(code)
        }
    }
}
