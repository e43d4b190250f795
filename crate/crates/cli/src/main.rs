//! `dualhead` command-line tool.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 for environment
//! failures such as an unwritable output location.

use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dualhead_core::harness::ExperimentPlan;
use dualhead_core::io::{
    correct_log, metrics_json, read_labels_csv, read_trajectory_csv, write_report_json,
    write_simulation,
};
use dualhead_core::sim::{PredictorStubConfig, RouteKind, SimConfig};
use dualhead_core::{confusion, report, CorrectionConfig, Error, SimilarityReport, SteeringSpace};

#[derive(Debug, Parser)]
#[command(
    name = "dualhead",
    version,
    about = "Confidence-guided steering correction and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Correct a line-delimited JSON prediction log.
    Correct(CorrectArgs),
    /// Run seeded closed-loop trials and write trajectories plus a report.
    Simulate(SimulateArgs),
    /// Compare a trajectory CSV against a reference CSV.
    Metrics(MetricsArgs),
    /// Precision/recall/F1 report from true and predicted label CSVs.
    ClassifyReport(ClassifyArgs),
}

#[derive(Debug, Args)]
struct CorrectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
    #[arg(long, default_value_t = 11)]
    bins: usize,
    #[arg(long, default_value_t = 0.9)]
    tau: f64,
    #[arg(long, default_value_t = 0.5)]
    low_conf: f64,
    #[arg(long, default_value_t = 1.5)]
    entropy_gate: f64,
    #[arg(long, default_value_t = 32)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Comma-separated subset of straight, one-turn, two-turn.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "straight,one-turn,two-turn"
    )]
    routes: Vec<RouteKind>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    fault_rate: f64,
    #[arg(long, default_value_t = 0.05)]
    reg_noise: f64,
    #[arg(long = "out")]
    output: PathBuf,
    /// Only run the uncorrected mode.
    #[arg(long)]
    no_correction: bool,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long = "true")]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, default_value_t = 11)]
    bins: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }

    fn env(e: impl std::fmt::Display) -> Self {
        Failure {
            code: 3,
            message: e.to_string(),
        }
    }

    fn from_core(e: Error) -> Self {
        if e.is_input_error() {
            Failure::input(e)
        } else {
            Failure::env(e)
        }
    }
}

type CliResult = Result<(), Failure>;

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn print_json(text: &str) -> CliResult {
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{text}").map_err(Failure::env)
}

fn cmd_correct(args: CorrectArgs) -> CliResult {
    let space = SteeringSpace::new(args.bins).map_err(Failure::input)?;
    let cfg = CorrectionConfig {
        tau: args.tau,
        low_conf: args.low_conf,
        entropy_gate: args.entropy_gate,
        sample_count: args.samples,
        rng_seed: args.seed,
        ..Default::default()
    };
    cfg.validate().map_err(Failure::input)?;
    let mut out = Vec::new();
    let summary = correct_log(open(&args.input)?, &mut out, &space, &cfg)
        .map_err(|e| Failure::input(format!("{}: {e}", args.input.display())))?;
    fs::write(&args.output, out)
        .map_err(|e| Failure::env(format!("{}: {e}", args.output.display())))?;
    write_report_json(&summary, &mut io::stdout().lock()).map_err(Failure::from_core)
}

fn cmd_simulate(args: SimulateArgs) -> CliResult {
    let plan = ExperimentPlan {
        routes: args.routes,
        trials_per_route: args.trials,
        base_seed: args.seed,
        corrected: !args.no_correction,
        uncorrected: true,
        sim: SimConfig {
            predictor: PredictorStubConfig {
                fault_rate: args.fault_rate,
                reg_noise_std: args.reg_noise,
                ..Default::default()
            },
            ..Default::default()
        },
    };
    plan.validate().map_err(Failure::input)?;
    let report = write_simulation(&plan, &args.output).map_err(|e| match e {
        Error::Io(io) => Failure::env(format!("{}: {io}", args.output.display())),
        e => Failure::from_core(e),
    })?;
    let mut stdout = io::stdout().lock();
    for o in &report.overall {
        if let Some(agg) = o.aggregate {
            writeln!(
                stdout,
                "{:<12} frechet {:.4}  dtw {:.2}  abc {:.2}  cl {:.4}",
                o.mode, agg.mean.frechet, agg.mean.dtw, agg.mean.abc, agg.mean.cl
            )
            .map_err(Failure::env)?;
        }
    }
    Ok(())
}

fn cmd_metrics(args: MetricsArgs) -> CliResult {
    let read = |p: &Path| {
        read_trajectory_csv(open(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display())))
    };
    let pred = read(&args.pred)?;
    let reference = read(&args.reference)?;
    let r = SimilarityReport::compute(&pred, &reference).map_err(Failure::input)?;
    print_json(&metrics_json(&r))
}

fn cmd_classify(args: ClassifyArgs) -> CliResult {
    let read = |p: &Path| {
        read_labels_csv(open(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display())))
    };
    let truth = read(&args.truth)?;
    let pred = read(&args.pred)?;
    let m = confusion(&truth, &pred, args.bins).map_err(Failure::input)?;
    let r = report(&m).map_err(Failure::input)?;
    let mut stdout = io::stdout().lock();
    write_report_json(&r, &mut stdout).map_err(Failure::from_core)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Correct(a) => cmd_correct(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::ClassifyReport(a) => cmd_classify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
