//! Command-line surface for trajectory anomaly detection: dataset generation,
//! ATDC/FastATDC runs, evaluation, sampling-rate sweeps, timing benchmarks,
//! and stage-1 score diagnostics. Outputs are JSON/JSONL/CSV for external
//! plotting.

mod commands;
mod common;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use common::Ctx;

#[derive(Parser)]
#[command(name = "fastatdc", version, about)]
struct Cli {
    /// Seed for dataset generation and sampling streams.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for scoring (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Output file; stdout when omitted.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Output format for commands that support both (eval).
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset (canonical JSONL).
    Gen(GenArgs),
    /// Run detection over a dataset; writes score records plus a summary.
    Detect(DetectArgs),
    /// Score a detection run against a labeled dataset.
    Eval(EvalArgs),
    /// Sweep sampling rates; one CSV row per (rate, seed, rep).
    Sweep(SweepArgs),
    /// Time ATDC vs FastATDC on datasets; CSV of per-100 seconds and speedup.
    Bench(BenchArgs),
    /// Per-class stage-1 score statistics (CSV) and the ordering check.
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Dataset preset t1..t6: trajectory count and class mixture.
    #[arg(long, value_parser = common::parse_preset)]
    preset: Option<fastatdc::trajdata::DatasetPreset>,
    /// Total trajectory count.
    #[arg(long)]
    n: Option<usize>,
    /// Class probabilities GD,LD,NT,LS,GS (must sum to 1).
    #[arg(long, value_parser = common::parse_probs)]
    probs: Option<Probs>,
    #[arg(long)]
    grid_w: Option<u32>,
    #[arg(long)]
    grid_h: Option<u32>,
    /// Target cell count of the base route.
    #[arg(long)]
    route_len: Option<usize>,
    /// Fraction of the route replaced by an LD detour.
    #[arg(long)]
    detour_frac: Option<f64>,
    /// Fraction of the route replaced by an LS cut.
    #[arg(long)]
    shortcut_frac: Option<f64>,
}

/// Newtype so clap can carry a parsed probability vector.
#[derive(Clone)]
struct Probs([f64; 5]);

/// Detection hyperparameters shared by detect/sweep/bench.
#[derive(Args, Clone)]
struct ScoringArgs {
    /// Nearest-ANT count for stage 2.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// ANT half-interval: stage-1 scores in [-phi, phi] are absolute normal.
    #[arg(long, default_value_t = 0.04)]
    phi: f64,
    /// Segmentation thresholds t1,t2,t3,t4 (t1 > t2 > 0 > t3 > t4).
    #[arg(long, value_parser = common::parse_theta, conflicts_with = "theta_preset")]
    theta: Option<fastatdc::Theta64>,
    /// Tuned per-dataset thresholds t1..t6 instead of the defaults.
    #[arg(long, value_parser = common::parse_preset)]
    theta_preset: Option<fastatdc::trajdata::DatasetPreset>,
}

#[derive(Args)]
struct DetectArgs {
    /// Dataset file in canonical JSONL.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Fastatdc)]
    method: MethodArg,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Stage-1 sampling rate in (0, 1].
    #[arg(long, default_value_t = 0.004)]
    r1: f64,
    /// Stage-2 ANT sampling rate in (0, 1].
    #[arg(long, default_value_t = 0.30)]
    r2: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Atdc,
    Fastatdc,
}

#[derive(Args)]
#[command(after_help = "CSV columns (--format csv): dataset,method,f1_gd,f1_ld,f1_nt,f1_ls,f1_gs,macro_f1_anomaly,case1_f1,case2_f1,seconds_per_100")]
struct EvalArgs {
    /// Labeled dataset file.
    #[arg(long)]
    dataset: PathBuf,
    /// Run file produced by `detect`.
    #[arg(long)]
    run: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StageArg {
    /// Sweep r1; r2 stays at --fixed-r2.
    Stage1,
    /// Sweep r2; r1 stays at --fixed-r1.
    Both,
}

#[derive(Args)]
#[command(after_help = "CSV columns: rate,seed,rep,f1_gd,f1_ld,f1_nt,f1_ls,f1_gs,macro_f1_anomaly,stage1_seconds,stage2_seconds,total_seconds,error (error is empty on success; failed cells keep their tag and the sweep continues)")]
struct SweepArgs {
    /// Labeled dataset file.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = StageArg::Stage1)]
    stage: StageArg,
    /// Comma-separated sampling rates in (0, 1]; defaults to the canonical
    /// grid for the chosen stage.
    #[arg(long)]
    rates: Option<String>,
    /// r1 used while sweeping r2.
    #[arg(long, default_value_t = 0.004)]
    fixed_r1: f64,
    /// r2 used while sweeping r1.
    #[arg(long, default_value_t = 1.0)]
    fixed_r2: f64,
    /// Comma-separated detection seeds.
    #[arg(long, default_value = "0")]
    seeds: String,
    /// Repeats per (rate, seed) cell; scores repeat, timings vary.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Args)]
#[command(after_help = "CSV columns: dataset,method,seconds_per_100,speedup (speedup = median ATDC per-100 seconds / median FastATDC per-100 seconds)")]
struct BenchArgs {
    /// Dataset files to benchmark.
    #[arg(required = true)]
    datasets: Vec<PathBuf>,
    /// Timing repetitions; the median is reported.
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0.004)]
    r1: f64,
    #[arg(long, default_value_t = 0.30)]
    r2: f64,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum S1Mode {
    /// Stage-1 score over all other trajectories.
    Full,
    /// Stage-1 score over an r1 sample.
    Sampled,
}

#[derive(Args)]
#[command(after_help = "CSV columns: class,prototype_id,mean_s1,var_s1,count; the ordering-check summary prints to stderr")]
struct StatsArgs {
    /// Labeled dataset file.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = S1Mode::Full)]
    s1_mode: S1Mode,
    /// Sampling rate for --s1-mode sampled.
    #[arg(long, default_value_t = 0.1)]
    r1: f64,
    /// ANT half-interval used by the NT-near-zero check.
    #[arg(long, default_value_t = 0.04)]
    phi: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Errors only if a global pool already exists; harmless here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let ctx = Ctx {
        seed: cli.seed,
        output: cli.output.clone(),
        csv: cli.format == Format::Csv,
    };
    let result = match &cli.command {
        Command::Gen(args) => commands::gen::run(args, &ctx),
        Command::Detect(args) => commands::detect::run(args, &ctx),
        Command::Eval(args) => commands::eval::run(args, &ctx),
        Command::Sweep(args) => commands::sweep::run(args, &ctx),
        Command::Bench(args) => commands::bench::run(args, &ctx),
        Command::Stats(args) => commands::stats::run(args, &ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
