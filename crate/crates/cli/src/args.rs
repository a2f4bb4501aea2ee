//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ratiobandit::bandit::DEFAULT_STATE_CAP;

use crate::grid::Grid;

#[derive(Debug, Parser)]
#[command(name = "ratiobandit", version, about = "Fractional Gittins indices and ratio-optimal bandit policies")]
pub struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true, env = "RATIOBANDIT_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Elimination,
    Restart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Index,
    Optimal,
}

/// Where to write a command's main output (stdout when absent).
#[derive(Debug, Args)]
pub struct OutArg {
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

/// Ensemble parameters, either from a JSON spec file or from flags.
#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// JSON ensemble spec; excludes the individual flags below.
    #[arg(long, conflicts_with_all = ["models", "states", "arms", "seed", "kappa_grid"])]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub models: usize,
    #[arg(long, default_value_t = 6)]
    pub states: usize,
    #[arg(long, default_value_t = 2)]
    pub arms: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Switching costs as start:stop:count, evenly spaced (default 0 to 4/3, 9 points).
    #[arg(long)]
    pub kappa_grid: Option<Grid>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every chain of a model file.
    Validate { model: PathBuf },

    /// Print the index of every state of one arm.
    Indices {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Elimination)]
        method: MethodArg,
        /// Arm name or number (default: arm 0).
        #[arg(long)]
        arm: Option<String>,
        /// Also compute the other method and report the largest difference.
        #[arg(long)]
        check_consistency: bool,
        /// Decimal places in the index column.
        #[arg(long, default_value_t = 8)]
        precision: usize,
        #[command(flatten)]
        out: OutArg,
    },

    /// Sweep R and D of one state and compare two state indices.
    Sweep {
        model: PathBuf,
        #[arg(long)]
        arm: Option<String>,
        /// State whose R and D are swept.
        #[arg(long, default_value_t = 7)]
        state: usize,
        /// State whose index is divided by the swept state's index.
        #[arg(long, default_value_t = 1)]
        against: usize,
        /// R values as start:stop:count, log-spaced.
        #[arg(long, default_value = "0.1:10:25")]
        r_grid: Grid,
        /// D values as start:stop:count, log-spaced.
        #[arg(long, default_value = "0.1:5:25")]
        d_grid: Grid,
        #[command(flatten)]
        out: OutArg,
    },

    /// Deviation of the index policy from the optimum over a random ensemble.
    Experiment {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Comma-separated percentiles in [0, 100].
        #[arg(long, value_delimiter = ',', default_value = "0,50,100")]
        percentiles: Vec<f64>,
        /// Add percentiles over all (model, kappa) cells.
        #[arg(long)]
        flat_percentiles: bool,
        /// Directory for records.csv, percentiles.csv and spec.json.
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Also write plot.gp for gnuplot.
        #[arg(long)]
        gnuplot: bool,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        cap: usize,
    },

    /// Monte Carlo estimate of a policy's ratio against its exact value.
    Simulate {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = PolicyArg::Index)]
        policy: PolicyArg,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        cap: usize,
    },

    /// Write one model of a random ensemble as a model file.
    Generate {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Model number within the ensemble.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Switching cost fraction stored as the model's switch delay.
        #[arg(long, default_value_t = 0.0)]
        kappa: f64,
        #[command(flatten)]
        out: OutArg,
    },
}
