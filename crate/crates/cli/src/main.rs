use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;

use config::{RunConfig, Task};

/// Community-aware network embedding.
#[derive(Parser)]
#[command(name = "care", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect Louvain communities and write `node community` lines.
    Communities(Options),
    /// Generate the random-walk corpus, one walk per line.
    Walks(Options),
    /// Run community detection, walks and skip-gram training; write
    /// word2vec-text embeddings.
    Embed(Options),
    /// Multi-label node classification; appends micro/macro F1 rows to a CSV.
    EvalClassify(Options),
    /// Link prediction on a held-out edge split; appends AUC rows to a CSV.
    EvalLinkpred(Options),
}

/// Shared by every subcommand. Unset values fall back to `--config`, then
/// to built-in defaults.
#[derive(Args, Debug, Default)]
pub struct Options {
    /// Flat `key = value` file; flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Edge list: `src dst [weight]` per line.
    #[arg(long, value_name = "FILE")]
    pub edges: Option<PathBuf>,
    /// Node labels: `node label [label ..]` per line.
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
    /// Precomputed word2vec-text embeddings for eval-classify.
    #[arg(long, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Dataset name for report rows (default: input file stem).
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub directed: bool,
    /// Read edge weights from the third column.
    #[arg(long)]
    pub weighted: bool,
    /// Reject node ids that are not non-negative integers.
    #[arg(long)]
    pub numeric_ids: bool,
    /// Community-jump probability per step.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub walk_length: Option<usize>,
    #[arg(long)]
    pub walks_per_node: Option<usize>,
    /// Neighbour steps avoid nodes already on the walk.
    #[arg(long)]
    pub self_avoiding: bool,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    /// Initial learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Single-threaded training for byte-identical output.
    #[arg(long)]
    pub deterministic: bool,
    /// Comma-separated list, e.g. `0.1,0.5,0.9`.
    #[arg(long, value_name = "LIST")]
    pub train_fraction: Option<String>,
    /// Comma-separated edge operators or `all`.
    #[arg(long, value_name = "LIST")]
    pub operator: Option<String>,
    #[arg(long)]
    pub removal_fraction: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (task, options) = match &cli.command {
        Command::Communities(o) => (Task::Communities, o),
        Command::Walks(o) => (Task::Walks, o),
        Command::Embed(o) => (Task::Embed, o),
        Command::EvalClassify(o) => (Task::EvalClassify, o),
        Command::EvalLinkpred(o) => (Task::EvalLinkpred, o),
    };
    let result = RunConfig::resolve(task, options).and_then(|config| commands::run(task, &config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
