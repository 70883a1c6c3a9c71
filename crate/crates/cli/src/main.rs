//! `fiberlab` command-line front end.

mod commands;
mod evaluate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "fiberlab", version, about = "Fiber morphology toolkit")]
struct Cli {
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolarityArg {
    Bright,
    Dark,
}

#[derive(Clone, Copy, ValueEnum)]
enum DuplicatePolicyArg {
    Paper,
    Coco,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MapeArg {
    Strict,
    Loose,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Annotate every PNG in a directory (one fiber per image).
    Annotate {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        denoise_radius: u32,
        #[arg(long, default_value_t = fiberlab::DEFAULT_KEYPOINT_COUNT)]
        keypoints: usize,
        /// Whether fibers are brighter or darker than the background.
        #[arg(long, value_enum, default_value = "bright")]
        polarity: PolarityArg,
        /// Output file (default: <dir>/annotations.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate synthetic scenes with exact annotations.
    Synth {
        /// TOML file with generator settings; omitted keys keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        count: usize,
        /// Overrides the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "synth")]
        out: PathBuf,
    },
    /// Resample every fiber to K equally spaced keypoints.
    Resample {
        input: PathBuf,
        #[arg(long, default_value_t = fiberlab::DEFAULT_KEYPOINT_COUNT)]
        keypoints: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Put the topmost (then leftmost) end point of every fiber first.
    Order {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prune misplaced keypoints of predictions against their predicted masks.
    Prune {
        /// Ground truth; when given, IoU against it is reported before and after.
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate predictions: AP/mAP, MAPE and KL divergence.
    Evaluate {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// `start:step:end` or a comma-separated list.
        #[arg(long, default_value = "0.5:0.05:0.95")]
        thresholds: String,
        #[arg(long, value_enum, default_value = "paper")]
        duplicate_policy: DuplicatePolicyArg,
        #[arg(long, value_enum, default_value = "both")]
        mape: MapeArg,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Directory for width/length histogram CSV files.
        #[arg(long)]
        histograms: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assign train/test splits per subset.
    Split {
        input: PathBuf,
        #[arg(long, default_value_t = fiberlab::dataset::DEFAULT_TRAIN_FRACTION)]
        fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// BIC-optimal keypoint count for the fibers of an annotation file.
    Bic {
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        min: usize,
        #[arg(long, default_value_t = 100)]
        max: usize,
        #[arg(long, default_value_t = 90.0)]
        percentile: f64,
        /// Arc-length samples per SSR evaluation.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n > 0, "--threads must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match cli.command {
        Command::Annotate {
            dir,
            denoise_radius,
            keypoints,
            polarity,
            out,
        } => commands::annotate(&dir, denoise_radius, keypoints, polarity, out),
        Command::Synth {
            config,
            count,
            seed,
            out,
        } => commands::synth(config.as_deref(), count, seed, &out),
        Command::Resample {
            input,
            keypoints,
            out,
        } => commands::resample(&input, keypoints, out.as_deref()),
        Command::Order { input, out } => commands::order(&input, out.as_deref()),
        Command::Prune { gt, pred, out } => commands::prune(gt.as_deref(), &pred, out.as_deref()),
        Command::Evaluate {
            gt,
            pred,
            thresholds,
            duplicate_policy,
            mape,
            bins,
            histograms,
            out,
        } => evaluate::run(evaluate::Args {
            gt: &gt,
            pred: &pred,
            thresholds: &thresholds,
            policy: duplicate_policy,
            mape,
            bins,
            histograms: histograms.as_deref(),
            out: out.as_deref(),
        }),
        Command::Split {
            input,
            fraction,
            seed,
            out,
        } => commands::split(&input, fraction, seed, out.as_deref()),
        Command::Bic {
            input,
            min,
            max,
            percentile,
            samples,
            out,
        } => commands::bic(&input, min, max, percentile, samples, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
