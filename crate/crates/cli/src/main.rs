//! `nbtr`: dataset generation, training, rating inference, classical rating
//! tools and evaluation from the command line.
//!
//! Exit codes: 0 success, 1 domain or runtime error, 2 usage error.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "nbtr", version, about = "Neural Bradley-Terry ratings and classical rating tools")]
struct Cli {
    /// Flat `key = value` file; each key is a long flag of the subcommand.
    /// Flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Generate a synthetic dataset with a manifest.
    Gen(GenArgs),
    /// Train a model on a dataset CSV and write a checkpoint and per-epoch report.
    Train(TrainArgs),
    /// Rate items from a feature CSV with a trained model.
    Rate(RateArgs),
    /// Maximum-likelihood Bradley-Terry scores from a match matrix.
    Mle(MleArgs),
    /// Fold a game history into Elo ratings.
    Elo(EloArgs),
    /// Accuracy, per-class statistics, correlation with a baseline, or the structure ablation.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Task {
    /// Noisy digit codes compared by value.
    Digits,
    /// Items with planted linear ratings and sampled matches.
    Planted,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "digits")]
    task: Task,
    /// Training records (digits) or sampled matches (planted).
    #[arg(long)]
    n: usize,
    /// Test records for the digits task [default: n / 6].
    #[arg(long)]
    n_test: Option<usize>,
    /// Random seed; required when the CI environment variable is set [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Item feature length [default: 16 for digits, 8 for planted].
    #[arg(long)]
    feature_dim: Option<usize>,
    /// Digits: judge by the rule `left_factor * left + left_offset > right`.
    #[arg(long)]
    asymmetric: bool,
    #[arg(long, default_value_t = 1.4)]
    left_factor: f64,
    #[arg(long, default_value_t = 0.1)]
    left_offset: f64,
    /// Digits: standard deviation of feature noise.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Digits: probability that an item shows a different digit than its true one.
    #[arg(long, default_value_t = 0.03)]
    confusion: f64,
    /// Digits: which digit a confused item shows.
    #[arg(long, value_enum, default_value = "adjacent")]
    confusion_kind: ConfusionKind,
    /// Planted: number of items.
    #[arg(long, default_value_t = 200)]
    items: usize,
    /// Planted: fraction of items withheld from training.
    #[arg(long, default_value_t = 0.25)]
    holdout: f64,
    /// Planted: standard deviation of the true ratings.
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum ConfusionKind {
    /// A neighbouring digit.
    Adjacent,
    /// Any other digit, uniformly.
    Uniform,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    /// Estimator only.
    Symmetric,
    /// Estimator, advantage adjuster and skip connection.
    Asym,
    /// Estimator and adjuster without the skip connection.
    AsymNoskip,
    /// Estimator only, trained on asymmetric data.
    AsymNoadj,
}

#[derive(Debug, Args, Serialize, Clone)]
struct TrainOptions {
    /// Task whose default estimator sizes apply.
    #[arg(long, value_enum, default_value = "digits")]
    task: Task,
    /// Hidden layer sizes of the rating estimator [default: 512,512 for digits, 64,64 for planted].
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Hidden layer sizes of the advantage adjuster [default: none, a single linear layer].
    #[arg(long, value_delimiter = ',')]
    adjuster_dims: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Adam step size.
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    /// Fraction of training records held out for per-epoch validation accuracy.
    #[arg(long, default_value_t = 0.0)]
    val_fraction: f64,
    /// Random seed; required when the CI environment variable is set [default: 0].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
struct TrainArgs {
    /// Training dataset CSV.
    #[arg(long)]
    data: PathBuf,
    /// Optional test dataset CSV, scored after the last epoch.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "symmetric")]
    mode: Mode,
    #[command(flatten)]
    opts: TrainOptions,
    /// Checkpoint JSON to write.
    #[arg(long)]
    out: PathBuf,
    /// Per-epoch report CSV [default: <out stem>.report.csv].
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
struct RateArgs {
    /// Checkpoint JSON.
    #[arg(long)]
    model: PathBuf,
    /// Feature CSV, one item per row.
    #[arg(long)]
    items: PathBuf,
    /// Output CSV (`item_id,rating`) [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Clone, Copy)]
struct EloOptions {
    /// Elo points per decade of score.
    #[arg(long, default_value_t = 400.0)]
    alpha: f64,
    /// Elo rating of a unit score.
    #[arg(long, default_value_t = 1500.0)]
    beta: f64,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
struct MleArgs {
    /// Match matrix CSV; with --home, the wins of home sides.
    #[arg(long)]
    matrix: PathBuf,
    /// Also fit a home advantage; requires --away.
    #[arg(long, requires = "away")]
    home: bool,
    /// Match matrix of away wins: row i, column j counts i winning away at j.
    #[arg(long)]
    away: Option<PathBuf>,
    #[command(flatten)]
    elo: EloOptions,
    /// Convergence threshold on the largest score change.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Output CSV (`item_index,pi,elo`) [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
struct EloArgs {
    /// History CSV with header `i,j,winner`.
    #[arg(long)]
    history: PathBuf,
    /// Number of items [default: one more than the largest index].
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 32.0)]
    k: f64,
    #[command(flatten)]
    elo: EloOptions,
    /// Output CSV (`item_id,elo`) [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
struct EvalArgs {
    /// Checkpoint JSON (not used by --ablation).
    #[arg(long, required_unless_present = "ablation")]
    model: Option<PathBuf>,
    /// Dataset CSV to score accuracy on.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Feature CSV of individual items (per-class statistics, correlation, ablation).
    #[arg(long)]
    items: Option<PathBuf>,
    /// Class of each item in --items, header `class`; enables per-class statistics.
    #[arg(long)]
    classes: Option<PathBuf>,
    /// Item ids to correlate, header `item_id`; enables correlation against --matches.
    #[arg(long, requires_all = ["matches", "items"])]
    holdout: Option<PathBuf>,
    /// History CSV of all matches; its maximum-likelihood Elo is the correlation baseline.
    #[arg(long)]
    matches: Option<PathBuf>,
    /// Train the three structures on --train and compare them on --test.
    #[arg(long, requires_all = ["train", "test", "items", "classes"])]
    ablation: bool,
    /// Ablation training dataset CSV.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Ablation test dataset CSV.
    #[arg(long)]
    test: Option<PathBuf>,
    #[command(flatten)]
    opts: TrainOptions,
    /// Report CSV; a summary and plot points are written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let raw: Vec<OsString> = std::env::args_os().collect();
    let args = match config::expand(raw) {
        Ok(a) => a,
        Err(msg) => {
            Cli::command().error(clap::error::ErrorKind::InvalidValue, msg).exit();
        }
    };
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(msg)) => {
            Cli::command().error(clap::error::ErrorKind::MissingRequiredArgument, msg).exit();
        }
        Err(commands::Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
