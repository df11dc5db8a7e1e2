//! Command-line front end. [`run`] parses arguments, executes one command
//! and returns the process exit code.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bench::{
    bench_calibrate, bench_forest, bench_hh, forest_report, hh_report, BenchReport, ForestBenchConfig, HhBenchConfig,
};
use crate::data::{gen_moons, read_csv_path, write_csv_path, Dataset};
use crate::forest::{evaluate, load_model, predict_dataset, save_model, train, ForestModel, Metrics, TrainConfig};
use crate::privacy::{EpsilonDelta, LeafMechanismKind};
use crate::threshold::{CalibrationMode, Variant};
use crate::tree::FeatureSchema;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "DP_LUMBERJACK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "dp-lumberjack", version, about = "Differentially private random forests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a forest and write the model file.
    Train(TrainArgs),
    /// Predict one label per row.
    Predict(PredictArgs),
    /// Report accuracy and a confusion summary.
    Evaluate(EvaluateArgs),
    /// Benchmark sweeps emitting CSV.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Write the two-moons toy dataset and its schema.
    GenMoons(GenMoonsArgs),
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = TrainConfig::DEFAULT_TREES)]
    trees: usize,
    #[arg(long, default_value_t = TrainConfig::DEFAULT_DEPTH)]
    depth: usize,
    #[arg(long, default_value_t = TrainConfig::DEFAULT_STRUCTURE_FRACTION)]
    structure_fraction: f64,
    #[arg(long, default_value_t = TrainConfig::DEFAULT_DELTA_SPLIT)]
    delta_split: f64,
    /// exponential_majority or gaussian_counts
    #[arg(long, default_value = "exponential_majority", value_parser = parse_leaf)]
    leaf: LeafMechanismKind,
    /// one_sided or two_sided
    #[arg(long, default_value = "one_sided", value_parser = parse_variant)]
    oracle: Variant,
    /// Threshold override (at least 1 + Δ).
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Write labels here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Separate CSV holding the label column, row-aligned with --data.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Binary-search marking against the top-down baseline.
    Hh(HhArgs),
    /// Toy forest accuracy across bound grids.
    Forest(ForestArgs),
    /// (σ, Δ, m, achieved δ) tables.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
struct HhArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32, 64])]
    heights: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 100.0)]
    tau: f64,
    #[arg(long, default_value_t = 0.8)]
    left_bias: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ForestArgs {
    #[arg(long, default_value_t = 2.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    #[arg(long, default_value_t = 25)]
    trees: usize,
    #[arg(long, default_value_t = 100)]
    depth: usize,
    #[arg(long, default_value_t = 0.75)]
    structure_fraction: f64,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    n_test: usize,
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Comma-separated `f1_hi x f2_hi` pairs, e.g. `5x4,50x40`.
    #[arg(long, value_delimiter = ',', default_values = ["5x4", "50x40", "5000x4000"], value_parser = parse_grid)]
    grids: Vec<(f64, f64)>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    epsilon: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    delta: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<u64>,
    /// simple or tight
    #[arg(long, default_value = "tight", value_parser = parse_mode)]
    mode: CalibrationMode,
    #[arg(long, default_value = "one_sided", value_parser = parse_variant)]
    oracle: Variant,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenMoonsArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 5.0)]
    f1_hi: f64,
    #[arg(long, default_value_t = 4.0)]
    f2_hi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    schema_out: PathBuf,
}

fn parse_leaf(s: &str) -> Result<LeafMechanismKind, String> {
    LeafMechanismKind::parse(s).ok_or_else(|| format!("unknown leaf mechanism {s:?}"))
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| format!("unknown oracle variant {s:?}"))
}

fn parse_mode(s: &str) -> Result<CalibrationMode, String> {
    match s {
        "simple" => Ok(CalibrationMode::Simple),
        "tight" => Ok(CalibrationMode::Tight),
        _ => Err(format!("unknown calibration mode {s:?}")),
    }
}

fn parse_grid(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once('x').ok_or_else(|| format!("expected AxB, got {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad bound in {s:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad bound in {s:?}"))?;
    Ok((a, b))
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) => EXIT_USAGE,
        Error::InfeasibleBudget(_) | Error::NonConvergence(_) => EXIT_BUDGET,
        Error::MalformedTree(_)
        | Error::Schema(_)
        | Error::Data(_)
        | Error::ModelFormat(_)
        | Error::Checksum { .. }
        | Error::Version(_)
        | Error::Io(_)
        | Error::Csv(_)
        | Error::Json(_) => EXIT_DATA,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Output goes to the given writers.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(pool) => pool,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let result = match &pool {
        Some(pool) => pool.install(|| dispatch(cli.command, stdout, stderr)),
        None => dispatch(cli.command, stdout, stderr),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, String> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().map(Some).map_err(|e| e.to_string())
}

fn dispatch(command: Command, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> crate::Result<()> {
    match command {
        Command::Train(a) => cmd_train(a, stdout, stderr),
        Command::Predict(a) => cmd_predict(a, stdout),
        Command::Evaluate(a) => cmd_evaluate(a, stdout),
        Command::Bench(BenchCommand::Hh(a)) => cmd_bench_hh(a, stdout),
        Command::Bench(BenchCommand::Forest(a)) => cmd_bench_forest(a, stdout, stderr),
        Command::Bench(BenchCommand::Calibrate(a)) => cmd_bench_calibrate(a, stdout),
        Command::GenMoons(a) => cmd_gen_moons(a, stderr),
    }
}

fn cmd_train(a: TrainArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> crate::Result<()> {
    let budget = EpsilonDelta::new(a.epsilon, a.delta)?;
    let cfg = TrainConfig {
        num_trees: a.trees,
        max_depth: a.depth,
        budget,
        structure_fraction: a.structure_fraction,
        delta_split: a.delta_split,
        tau: a.tau,
        leaf: a.leaf,
        variant: a.oracle,
        seed: a.seed,
    };
    cfg.validate()?;
    let schema = FeatureSchema::load(&a.schema)?;
    let (data, report) = read_csv_path(&a.data, &schema)?;
    writeln!(stderr, "ingest: {report}")?;
    let model = train(&data, &schema, &cfg)?;
    save_model(&a.out, &model)?;
    for (k, v) in model.transcript().fields() {
        writeln!(stdout, "{k}={v}")?;
    }
    writeln!(stdout, "leaves={}", model.num_leaves())?;
    Ok(())
}

fn load_rows(model: &ForestModel, path: &PathBuf) -> crate::Result<Dataset> {
    let (data, _) = read_csv_path(path, model.schema())?;
    Ok(data)
}

fn cmd_predict(a: PredictArgs, stdout: &mut dyn Write) -> crate::Result<()> {
    let model = load_model(&a.model)?;
    let data = load_rows(&model, &a.data)?;
    let predictions = predict_dataset(&model, &data)?;
    let classes = model.schema().classes();
    let write_all = |w: &mut dyn Write| -> crate::Result<()> {
        for p in &predictions {
            writeln!(w, "{}", classes[*p as usize])?;
        }
        Ok(())
    };
    match &a.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_all(&mut w)?;
            w.flush()?;
        }
        None => write_all(stdout)?,
    }
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs, stdout: &mut dyn Write) -> crate::Result<()> {
    let model = load_model(&a.model)?;
    let data = load_rows(&model, &a.data)?;
    let metrics = match &a.labels {
        None => evaluate(&model, &data)?,
        Some(path) => {
            let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
            let label = model.schema().label();
            let pos = rdr
                .headers()?
                .iter()
                .position(|h| h == label)
                .ok_or_else(|| Error::Schema(format!("labels file has no column {label:?}")))?;
            let mut truth = Vec::new();
            for record in rdr.records() {
                let record = record?;
                let y = model
                    .schema()
                    .class_index(&record[pos])
                    .ok_or_else(|| Error::Data(format!("unknown label {:?}", &record[pos])))?;
                truth.push(y);
            }
            let predicted = predict_dataset(&model, &data)?;
            Metrics::from_predictions(&truth, &predicted, model.schema().num_classes())?
        }
    };
    write_metrics(&metrics, model.schema(), stdout)
}

fn write_metrics(m: &Metrics, schema: &FeatureSchema, out: &mut dyn Write) -> crate::Result<()> {
    writeln!(out, "accuracy={}", m.accuracy)?;
    writeln!(out, "rows={} correct={}", m.rows, m.correct)?;
    for (i, name) in schema.classes().iter().enumerate() {
        let actual: u64 = m.confusion[i].iter().sum();
        let predicted: u64 = m.confusion.iter().map(|r| r[i]).sum();
        writeln!(out, "class={name} actual={actual} predicted={predicted} correct={}", m.confusion[i][i])?;
    }
    writeln!(out, "confusion (rows: actual, columns: predicted)")?;
    for row in &m.confusion {
        writeln!(out, "{}", row.iter().map(u64::to_string).collect::<Vec<_>>().join(" "))?;
    }
    Ok(())
}

fn emit(report: &BenchReport, out: &Option<PathBuf>, stdout: &mut dyn Write) -> crate::Result<()> {
    match out {
        Some(path) => report.write_csv(BufWriter::new(File::create(path)?)),
        None => report.write_csv(stdout),
    }
}

fn cmd_bench_hh(a: HhArgs, stdout: &mut dyn Write) -> crate::Result<()> {
    let cfg = HhBenchConfig {
        heights: a.heights,
        rho: a.rho,
        trials: a.trials,
        n: a.n,
        tau: a.tau,
        left_bias: a.left_bias,
        seed: a.seed,
    };
    let runs = bench_hh(&cfg)?;
    emit(&hh_report(&cfg, &runs), &a.out, stdout)
}

fn cmd_bench_forest(a: ForestArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> crate::Result<()> {
    let cfg = ForestBenchConfig {
        epsilon: a.epsilon,
        delta: a.delta,
        trees: a.trees,
        depth: a.depth,
        structure_fraction: a.structure_fraction,
        n: a.n,
        n_test: a.n_test,
        seeds: (0..a.seeds).collect(),
        grids: a.grids,
    };
    writeln!(stderr, "{}", cfg.describe())?;
    let runs = bench_forest(&cfg)?;
    emit(&forest_report(&cfg, &runs), &a.out, stdout)
}

fn cmd_bench_calibrate(a: CalibrateArgs, stdout: &mut dyn Write) -> crate::Result<()> {
    let report = bench_calibrate(&a.epsilon, &a.delta, &a.m, a.mode, a.oracle)?;
    emit(&report, &a.out, stdout)
}

fn cmd_gen_moons(a: GenMoonsArgs, stderr: &mut dyn Write) -> crate::Result<()> {
    if !(a.f1_hi > 1.0 && a.f2_hi > 1.0) {
        return Err(Error::param("bounds must exceed 1"));
    }
    let (schema, data) = gen_moons(a.n, (a.f1_hi, a.f2_hi), a.seed);
    write_csv_path(&a.out, &data, &schema)?;
    schema.save(&a.schema_out)?;
    writeln!(stderr, "wrote {} rows", data.len())?;
    Ok(())
}
