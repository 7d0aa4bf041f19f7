use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Shapelet discovery, shapelet transform and random-forest classification of time series.
#[derive(Debug, Parser)]
#[command(name = "shapelet", version)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for discovery, forest and balancing; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Condition raw streams into a dataset CSV.
    Preprocess(PreprocessArgs),
    /// Find shapelets in a labelled dataset CSV.
    Discover(DiscoverArgs),
    /// Map a dataset CSV to distances against a shapelet set.
    Transform(TransformArgs),
    /// Train a random forest on a transform CSV.
    Train(TrainArgs),
    /// Predict labels and class probabilities for a transform CSV.
    Predict(ModelArgs),
    /// Score a model on a labelled transform CSV.
    Evaluate(ModelArgs),
    /// Write a synthetic two-class detection dataset CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Io {
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// One sample per line.
    #[default]
    Stream,
    /// Dataset CSV, label first.
    Dataset,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Input files; several streams become several series.
    #[arg(long, short, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: InputFormat,
    /// Dataset input has a header row.
    #[arg(long)]
    pub header: bool,
    /// Sample rate in Hz; overrides the config.
    #[arg(long)]
    pub sample_rate: Option<f64>,
    /// Label for stream input (default `?`).
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub io: Io,
    /// Dataset input has a header row.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long)]
    pub shapelets: PathBuf,
    /// Dataset input has a header row.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long)]
    pub shapelets: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long)]
    pub shapelets: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    pub per_class: usize,
    #[arg(long, default_value_t = 100)]
    pub length: usize,
    #[arg(long, default_value_t = 20)]
    pub burst_len: usize,
    #[arg(long, default_value_t = 3.0)]
    pub amplitude: f64,
}
