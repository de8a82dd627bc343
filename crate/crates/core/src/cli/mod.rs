//! The `fitbot` command line.
//!
//! ```text
//! fitbot [--config PATH] [--seed N] [--out DIR] <group> <command> [flags]
//!
//!   eeg gen | detect | eval
//!   emotion train | classify | gradcheck
//!   sim run
//!   curate run
//! ```
//!
//! Exit status is 0 on success, 2 for usage, configuration or input errors,
//! and 3 when a result misses its configured floor.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FLOOR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fitbot", version, about = "EEG blink detection, emotion recognition, edge/cloud simulation and data curation")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving every artifact.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Group,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Synthetic EEG and blink detection.
    #[command(subcommand)]
    Eeg(EegCommand),
    /// Emotion classifier training and inference.
    #[command(subcommand)]
    Emotion(EmotionCommand),
    /// Device/edge/cloud message simulation.
    #[command(subcommand)]
    Sim(SimCommand),
    /// Unlabeled-data admission.
    #[command(subcommand)]
    Curate(CurateCommand),
}

#[derive(Debug, Subcommand)]
pub enum EegCommand {
    /// Write a synthetic trace with injected blinks.
    Gen(EegGenArgs),
    /// Detect blinks in a trace.
    Detect(EegDetectArgs),
    /// Score detections against the injected blink times.
    Eval(EegEvalArgs),
}

#[derive(Debug, Args)]
pub struct EegGenArgs {
    #[arg(long)]
    pub blinks: Option<usize>,
    #[arg(long)]
    pub duration_ms: Option<f64>,
    #[arg(long)]
    pub sample_rate: Option<f64>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub blink_amplitude: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EegDetectArgs {
    /// Trace file, `.csv` or `.json` (default: OUT/trace.json).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub merge_gap_ms: Option<f64>,
    #[arg(long)]
    pub refractory_ms: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EegEvalArgs {
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub tolerance_ms: Option<f64>,
    #[arg(long)]
    pub recall_floor: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum EmotionCommand {
    /// Train on a dataset directory, or on the generated toy set.
    Train(EmotionTrainArgs),
    /// Classify one feature sequence.
    Classify(EmotionClassifyArgs),
    /// Compare backprop gradients with finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
pub struct EmotionTrainArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub accuracy_floor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EmotionClassifyArgs {
    /// Model parameters (default: OUT/params.json).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// FrameSequence JSON.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum SimCommand {
    Run(SimRunArgs),
}

#[derive(Debug, Args)]
pub struct SimRunArgs {
    #[arg(long)]
    pub topology: Option<PathBuf>,
    #[arg(long)]
    pub workload: Option<PathBuf>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub budget_ms: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum CurateCommand {
    Run(CurateRunArgs),
}

#[derive(Debug, Args)]
pub struct CurateRunArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    #[arg(long)]
    pub tau_sim: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::execute(cli) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
