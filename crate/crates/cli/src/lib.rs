//! Command-line front end for the `micromotion` pipeline.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod server;

#[derive(Debug, Parser)]
#[command(
    name = "micromotion",
    version,
    about = "Hand micro-motion magnification, labeling and classification"
)]
pub struct Cli {
    /// JSON file with default settings; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Magnify subtle motion in a frame sequence.
    Magnify(MagnifyArgs),
    /// OR the original and magnified videos into a motion heatmap.
    Heatmap(HeatmapArgs),
    /// Average the heatmap with keypoint renders into the labeling video.
    Overlay(OverlayArgs),
    /// Serve frames and accept label files over local HTTP.
    LabelServe(ServeArgs),
    /// Extract per-region waveforms into a dataset.
    Extract(ExtractArgs),
    /// Split a dataset and fit a kNN model.
    Train(TrainArgs),
    /// Evaluate a model, or run seeded train/test splits.
    Eval(EvalArgs),
    /// Accuracy for several values of k on one split.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct MagnifyArgs {
    /// Input manifest.json.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    /// Lower band edge in Hz (inclusive).
    #[arg(long)]
    pub f_lo: Option<f64>,
    /// Upper band edge in Hz (exclusive).
    #[arg(long)]
    pub f_hi: Option<f64>,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    /// Original video manifest.
    #[arg(long)]
    pub original: PathBuf,
    /// Magnified video manifest.
    #[arg(long)]
    pub magnified: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OverlayArgs {
    /// Heatmap video manifest.
    #[arg(long)]
    pub heatmap: PathBuf,
    /// Original video manifest (keypoint coordinates refer to it).
    #[arg(long)]
    pub original: PathBuf,
    /// Keypoint track JSON.
    #[arg(long)]
    pub keypoints: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub min_confidence: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Overlap video manifest; frames and labels use its dimensions.
    #[arg(long)]
    pub overlap: PathBuf,
    #[arg(long)]
    pub raw: Option<PathBuf>,
    #[arg(long)]
    pub magnified: Option<PathBuf>,
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
    /// Keypoint track in original-video coordinates; needs --raw.
    #[arg(long, requires = "raw")]
    pub keypoints: Option<PathBuf>,
    /// Where label files are persisted.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub host: Option<String>,
    #[arg(long)]
    pub port: Option<u16>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Magnified video manifest; repeat together with --labels.
    #[arg(long, required = true)]
    pub video: Vec<PathBuf>,
    /// Label file for the matching --video.
    #[arg(long, required = true)]
    pub labels: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Central window in seconds; 0 keeps the whole waveform.
    #[arg(long)]
    pub window_secs: Option<f64>,
    #[arg(long)]
    pub feature_length: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset CSV written by `extract`.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Model written by `train`; without it, seeded splits of the dataset
    /// are trained and evaluated.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    /// Comma-separated split seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated values of k.
    #[arg(long, value_delimiter = ',')]
    pub k_values: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let file = config::FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Magnify(a) => commands::magnify(&a, &file),
        Command::Heatmap(a) => commands::heatmap(&a),
        Command::Overlay(a) => commands::overlay(&a, &file),
        Command::LabelServe(a) => server::serve(&a, &file),
        Command::Extract(a) => commands::extract(&a, &file),
        Command::Train(a) => commands::train(&a, &file),
        Command::Eval(a) => commands::eval(&a, &file),
        Command::Sweep(a) => commands::sweep(&a, &file),
    }
}
