//! Command-line front end: synthetic cubes, dimensionality reduction,
//! denoising, target detection, classification and evaluation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

mod config;
mod run;

/// Error category mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Exit 1: bad flags or invalid invocation.
    Usage(String),
    /// Exit 2: unreadable or inconsistent data.
    Data(String),
    /// Exit 3: numeric degeneracy.
    Numeric(String),
}

impl From<hsikit::Error> for CliError {
    fn from(e: hsikit::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hsikit",
    version,
    about = "Manifold learning and tensor toolbox for hyperspectral-style data cubes"
)]
struct Cli {
    /// Optional key = value config file; CLI flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic labeled cube (ENVI output).
    Synth(SynthArgs),
    /// Dimensionality reduction to per-pixel features (CSV output).
    Dr(DrArgs),
    /// Rank-1 tensor denoising of a cube.
    Denoise(DenoiseArgs),
    /// Metric-learned target detection score map.
    Detect(DetectArgs),
    /// Pixel classification (knn on features or spectra, stm on windows).
    Classify(ClassifyArgs),
    /// Compare predictions against ground truth.
    Eval(EvalArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    bands: Option<usize>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    mixing_width: Option<f64>,
    /// Output cube base path (writes <base>.hdr and <base>.raw).
    #[arg(long)]
    out_cube: Option<PathBuf>,
    /// Output label raster base path.
    #[arg(long)]
    out_labels: Option<PathBuf>,
}

#[derive(Args)]
struct DrArgs {
    /// pca | lda | le | lle | dla | ndml | mfc | msne | tdla
    #[arg(long)]
    method: Option<String>,
    /// Input cube base path.
    #[arg(long)]
    cube: Option<PathBuf>,
    /// Label raster base path (required by supervised methods).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Target dimensionality.
    #[arg(long)]
    dim: Option<usize>,
    /// Output CSV: pixel id followed by embedded features.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    k1: Option<usize>,
    #[arg(long)]
    k2: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// Heat-kernel bandwidth; omit for the median rule.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    perplexity: Option<f64>,
    /// Weight exponent for mfc/msne.
    #[arg(long)]
    r: Option<f64>,
    /// Alternations (mfc/msne, ndml) or outer sweeps (tdla).
    #[arg(long)]
    iters: Option<usize>,
    /// Gradient steps per msne alternation.
    #[arg(long)]
    inner_iters: Option<usize>,
    /// Spatial window for tdla.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DenoiseArgs {
    #[arg(long)]
    cube: Option<PathBuf>,
    /// Number of rank-1 terms to extract.
    #[arg(long)]
    k: Option<usize>,
    /// Optional energy fraction; keeps the smallest k whose squared
    /// weights reach it.
    #[arg(long)]
    energy: Option<f64>,
    #[arg(long)]
    out_cube: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    cube: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Target spectrum CSV (one band value per line); defaults to the
    /// mean of the positive training spectra.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Raster class treated as target.
    #[arg(long)]
    target_class: Option<usize>,
    #[arg(long)]
    lambda_sim: Option<f64>,
    #[arg(long)]
    lambda_smooth: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Output CSV: pixel id, detection score.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// knn | stm
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    cube: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Feature CSV from `dr` (knn only); raw spectra when omitted.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Training pixels per class, first in raster order.
    #[arg(long)]
    train_per_class: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Raster class treated as target (stm only).
    #[arg(long)]
    target_class: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    /// Outer alternations (stm only).
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    /// Output CSV: pixel id, predicted class.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Predictions CSV: pixel id, predicted class.
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Truth label raster base path.
    #[arg(long)]
    truth_raster: Option<PathBuf>,
    /// Truth CSV (pixel id, class) as an alternative to the raster.
    #[arg(long)]
    truth_csv: Option<PathBuf>,
    /// Remap truth to target-vs-rest (1 vs 2) for binary predictions.
    #[arg(long)]
    binary_class: Option<usize>,
    /// Output report CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = config::Config::load(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Synth(a) => run::synth(&a, &cfg),
        Cmd::Dr(a) => run::dr(&a, &cfg),
        Cmd::Denoise(a) => run::denoise(&a, &cfg),
        Cmd::Detect(a) => run::detect(&a, &cfg),
        Cmd::Classify(a) => run::classify(&a, &cfg),
        Cmd::Eval(a) => run::eval(&a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("data error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numeric error: {msg}");
            ExitCode::from(3)
        }
    }
}
