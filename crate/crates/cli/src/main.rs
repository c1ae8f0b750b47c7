//! `flucast` command-line frontend.
//!
//! Exit status: 0 on success, 1 on a usage or configuration error, 2 when
//! input data is missing or invalid.

mod commands;
mod config;
mod grid;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "flucast", version, about = "Weekly ILI nowcasting from post hashtags and image similarity")]
struct Cli {
    /// TOML run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = "FLUCAST_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus (posts, embeddings, references, surveillance).
    Synth(SynthArgs),
    /// Build features.csv from a corpus.
    Featurize(FeaturizeArgs),
    /// K-fold grid search on the training period.
    CvSearch(SearchArgs),
    /// Fit one model on the training period and save it.
    Train(TrainArgs),
    /// Nowcast evaluation on the test period.
    Evaluate(EvalArgs),
    /// h-week-ahead evaluation on the test period.
    Forecast(EvalArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub weeks: Option<usize>,
    /// 1536-dimensional embeddings instead of the small test default.
    #[arg(long)]
    pub realistic: bool,
    /// Remove all incidence signal from posts and images.
    #[arg(long)]
    pub negative_control: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct DataArgs {
    /// Precomputed features CSV; replaces the corpus inputs.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Directory holding posts.jsonl, embeddings.csv, references.csv, surveillance.csv.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub posts: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub references: Option<PathBuf>,
    #[arg(long)]
    pub surveillance: Option<PathBuf>,
    /// Comma-separated tracked hashtags.
    #[arg(long, value_delimiter = ',')]
    pub keywords: Option<Vec<String>>,
    /// Threshold multiplier c in `mu − c·sigma`.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Embeddings used for reference statistics: `train` or `all`.
    #[arg(long)]
    pub profile_corpus: Option<String>,
    /// Comma-separated subset of `date,count,image`.
    #[arg(long, value_delimiter = ',')]
    pub modalities: Option<Vec<String>>,
    /// First test week (a Monday, YYYY-MM-DD).
    #[arg(long)]
    pub split_date: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ModelArgs {
    /// Model kind, e.g. `gbt`, `ridge`, `random_forest`.
    #[arg(long)]
    pub model: Option<String>,
    /// Hyperparameter override `name=value`; repeatable.
    #[arg(long = "hp", value_name = "NAME=VALUE")]
    pub hyperparameters: Vec<String>,
    /// JSON model spec file (as written by cv-search).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Restrict the default grid to these kinds (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub model: Option<Vec<String>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Shuffle rows before cutting folds, with this seed.
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Pick the model by grid search on the training rows at this horizon.
    #[arg(long)]
    pub search: bool,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
}

/// Bad flags or configuration; exits with status 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = config::RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth(a) => commands::synth(&cfg, a),
        Command::Featurize(a) => commands::featurize(&cfg, a),
        Command::CvSearch(a) => commands::cv_search(&cfg, a),
        Command::Train(a) => commands::train(&cfg, a),
        Command::Evaluate(a) => commands::evaluate(&cfg, a, "evaluate"),
        Command::Forecast(a) => commands::evaluate(&cfg, a, "forecast"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
