//! `camdepth` command-line front-end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

pub mod config;
mod eval;
mod synth;
mod tools;

use config::{ReportFormat, RunConfig, WORKERS_ENV};

#[derive(Debug, Parser)]
#[command(name = "camdepth", version, about = "Synthesize, filter and evaluate camera depth maps")]
pub struct Cli {
    /// Global seed; overrides `seed` in the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for per-sample work.
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// TOML run config; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize camera-like depth for every sample in a manifest.
    Synth(SynthArgs),
    /// Score predicted depth against ground truth.
    Eval(EvalArgs),
    /// Guided-filter a depth map.
    Gfilter(GfilterArgs),
    /// Back-project a depth map to a PLY point cloud.
    Cloud(CloudArgs),
    /// Smoothness metrics for joint trajectories.
    Traj(TrajArgs),
    /// Check that every file a manifest references exists.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Dataset manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory for `<id>.png` files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON-lines run log [default: `<out>.log.jsonl` beside the output directory].
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Manifest providing ground truth (and predictions unless --pred-dir is given).
    #[arg(long, conflicts_with = "gt_dir")]
    pub manifest: Option<PathBuf>,
    /// Directory of predicted depth PNGs, matched to samples by `<id>.png`.
    #[arg(long)]
    pub pred_dir: Option<PathBuf>,
    /// Directory of ground-truth depth PNGs (requires --pred-dir).
    #[arg(long, requires = "pred_dir")]
    pub gt_dir: Option<PathBuf>,
    /// Manifest field used as prediction when --pred-dir is absent.
    #[arg(long, value_enum, default_value_t = PredField::Pred)]
    pub pred_field: PredField,
    /// Pixel set the metrics are computed over.
    #[arg(long, default_value = "intersection")]
    pub policy: camdepth_core::ValidPolicy,
    /// Fill prediction holes with the nearest valid value first.
    #[arg(long)]
    pub fill: bool,
    /// Also report accuracy in ground-truth distance bins of this width (m).
    #[arg(long)]
    pub bins: Option<f64>,
    /// Upper edge of the distance bins (m).
    #[arg(long, default_value_t = 10.0)]
    pub max_range: f64,
    /// PNG units per meter [default: manifest intrinsics, else 1000].
    #[arg(long)]
    pub depth_scale: Option<f64>,
    /// Report formats to write.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Vec<ReportFormat>,
    /// Report directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PredField {
    Pred,
    Camera,
}

#[derive(Debug, Args)]
pub struct GfilterArgs {
    /// Guide image: a 16-bit depth PNG or an 8-bit RGB PNG.
    #[arg(long)]
    pub guide: PathBuf,
    /// Depth PNG to filter.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub radius: usize,
    #[arg(long, default_value_t = camdepth_core::gfilter::DEFAULT_EPSILON)]
    pub eps: f64,
    /// Minimum jointly valid pixels for a window to contribute.
    #[arg(long, default_value_t = camdepth_core::gfilter::DEFAULT_MIN_VALID)]
    pub min_valid: usize,
    #[arg(long, default_value_t = camdepth_core::DEFAULT_DEPTH_SCALE)]
    pub depth_scale: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CloudArgs {
    #[arg(long)]
    pub depth: PathBuf,
    /// Intrinsics JSON (fx, fy, cx, cy, width, height, depth_scale).
    #[arg(long)]
    pub intrinsics: PathBuf,
    /// Optional RGB image for per-point color.
    #[arg(long)]
    pub rgb: Option<PathBuf>,
    #[arg(long, default_value = "binary")]
    pub mode: camdepth_core::PlyMode,
    /// PNG units per meter [default: from the intrinsics file].
    #[arg(long)]
    pub depth_scale: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrajArgs {
    /// Trajectory CSVs, one per method; the method name is the file stem.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Sample rate (Hz) for CSVs without a time column.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Output directory for smoothness.json and smoothness.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Per-sample failures of a command that otherwise ran to completion.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<(String, String)>,
}

impl Outcome {
    fn exit_code(&self) -> ExitCode {
        if self.failures.is_empty() {
            ExitCode::SUCCESS
        } else {
            eprintln!("{} sample(s) failed:", self.failures.len());
            for (id, err) in &self.failures {
                eprintln!("  {id}: {err}");
            }
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match &cli.command {
        Command::Synth(a) => synth::run(a, &cfg, &cli),
        Command::Eval(a) => eval::run(a, &cfg, &cli),
        Command::Gfilter(a) => tools::gfilter(a),
        Command::Cloud(a) => tools::cloud(a),
        Command::Traj(a) => tools::traj(a),
        Command::Validate(a) => tools::validate(a, &cfg),
    }
}

pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn pick_path(flag: Option<&PathBuf>, cfg: Option<&PathBuf>, what: &str) -> Result<PathBuf> {
    flag.or(cfg)
        .cloned()
        .with_context(|| format!("no {what} given (flag or config file)"))
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("starting worker pool")
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
