//! Command-line entry point: fixture generation, single clustering runs,
//! benchmark grids and initializer comparisons.
//!
//! Exit codes: 0 on success, 1 on validation errors, 2 on i/o errors.
//! Human-readable summaries go to stdout; machine-readable artifacts are
//! only ever written to files, atomically.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use k2means::bench::{
    compare_inits, emit_trace_csv, run_bench, speedup_at_reference, BenchError, BenchReport,
    BenchSpec, EngineKind, InitKind, MethodSpec, ReportRow,
};
use k2means::engines::{run_elkan, run_k2means, run_lloyd, run_minibatch, EngineConfig};
use k2means::io::{atomic_write, gen_gmm, load_matrix, save_matrix, IoError, MatrixDtype};
use k2means::{energy, ClusterState, Dataset, OpCounter};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "k2means", version, about = "Clustering engines and benchmarks over dense data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Gaussian-blob fixture and write it as .k2mx.
    Gen(GenArgs),
    /// Run one init + engine pipeline on a dataset.
    Cluster(ClusterArgs),
    /// Run a benchmark grid described by a JSON spec.
    Bench(BenchArgs),
    /// Compare random, k-means++ and GDI initializations under Lloyd.
    CompareInits(CompareArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Output path (.k2mx or .csv).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Number of generated blobs.
    #[arg(long)]
    k_true: usize,
    /// Minimum distance between blob means.
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional CSV of ground-truth labels, one per line.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    /// Input dataset (.k2mx or .csv).
    #[arg(long)]
    data: PathBuf,
    /// lloyd | elkan | minibatch | k2means
    #[arg(long)]
    method: String,
    /// random | kmeanspp | gdi
    #[arg(long, default_value = "random")]
    init: String,
    #[arg(long)]
    k: usize,
    /// Neighborhood size; k2means only.
    #[arg(long)]
    kn: Option<usize>,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// MiniBatch batch size.
    #[arg(long, default_value_t = 100)]
    batch_size: usize,
    /// MiniBatch batch count; defaults to n/2.
    #[arg(long)]
    mb_iters: Option<usize>,
    /// Write the run trace as CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Write the final state as JSON.
    #[arg(long)]
    state_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark spec JSON.
    #[arg(long)]
    spec: PathBuf,
    /// Report JSON output path.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for independent cells; 0 uses all cores. The
    /// K2_PARALLELISM environment variable overrides this flag.
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Optional JSON output of the comparison rows.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io(_) => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Io(io) => CliError::from(io),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Bench(args) => cmd_bench(args),
        Command::CompareInits(args) => cmd_compare(args),
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    if args.n == 0 || args.d == 0 || args.k_true == 0 {
        return Err(CliError::Validation("n, d and k-true must be at least 1".into()));
    }
    if args.k_true > args.n {
        return Err(CliError::Validation(format!(
            "k-true = {} exceeds n = {}",
            args.k_true, args.n
        )));
    }
    let (data, labels) = gen_gmm(args.n, args.d, args.k_true, args.separation, args.seed)?;
    save_matrix(&args.out, &data, MatrixDtype::F64)?;
    if let Some(labels_path) = &args.labels_out {
        let mut text = String::new();
        for label in &labels {
            text.push_str(&format!("{label}\n"));
        }
        atomic_write(labels_path, text.as_bytes())?;
    }
    println!("seed: {}", args.seed);
    println!(
        "wrote {} ({} x {}, {} blobs, separation {})",
        args.out.display(),
        args.n,
        args.d,
        args.k_true,
        args.separation
    );
    Ok(())
}

fn parse_engine(name: &str) -> Result<EngineKind, CliError> {
    match name {
        "lloyd" => Ok(EngineKind::Lloyd),
        "elkan" => Ok(EngineKind::Elkan),
        "minibatch" => Ok(EngineKind::MiniBatch),
        "k2means" => Ok(EngineKind::K2Means),
        other => Err(CliError::Validation(format!(
            "unknown method {other:?}; valid methods: lloyd, elkan, minibatch, k2means"
        ))),
    }
}

fn parse_init(name: &str) -> Result<InitKind, CliError> {
    match name {
        "random" => Ok(InitKind::Random),
        "kmeanspp" => Ok(InitKind::Kmeanspp),
        "gdi" => Ok(InitKind::Gdi),
        other => Err(CliError::Validation(format!(
            "unknown init {other:?}; valid inits: random, kmeanspp, gdi"
        ))),
    }
}

#[derive(Serialize)]
struct StateJson<'a> {
    method: &'a str,
    init: &'a str,
    k: usize,
    d: usize,
    seed: u64,
    energy: f64,
    total_ops: f64,
    iterations: usize,
    centers: Vec<Vec<f64>>,
    assignments: &'a [usize],
}

fn write_state_json(
    path: &Path,
    args: &ClusterArgs,
    state: &ClusterState,
    run_energy: f64,
    total_ops: f64,
    iterations: usize,
) -> Result<(), CliError> {
    let centers: Vec<Vec<f64>> = (0..state.k()).map(|j| state.center(j).to_vec()).collect();
    let json = StateJson {
        method: &args.method,
        init: &args.init,
        k: state.k(),
        d: state.d(),
        seed: args.seed,
        energy: run_energy,
        total_ops,
        iterations,
        centers,
        assignments: state.assignments(),
    };
    let mut bytes = serde_json::to_vec_pretty(&json).expect("state serializes");
    bytes.push(b'\n');
    atomic_write(path, &bytes)?;
    Ok(())
}

fn cmd_cluster(args: ClusterArgs) -> Result<(), CliError> {
    let engine = parse_engine(&args.method)?;
    let init_kind = parse_init(&args.init)?;
    // Flag combinations are validated before any work.
    match (engine, args.kn) {
        (EngineKind::K2Means, Some(kn)) => {
            if kn > args.k {
                return Err(CliError::Validation(format!(
                    "k_n must be <= k (got k_n = {kn}, k = {})",
                    args.k
                )));
            }
            if kn == 0 {
                return Err(CliError::Validation("k_n must be at least 1".into()));
            }
        }
        (EngineKind::K2Means, None) => {
            return Err(CliError::Validation("method k2means requires --kn".into()));
        }
        (_, Some(_)) => {
            return Err(CliError::Validation("--kn requires method=k2means".into()));
        }
        (_, None) => {}
    }
    if args.max_iters == 0 {
        return Err(CliError::Validation("max-iters must be at least 1".into()));
    }

    let data = load_data(&args.data)?;
    let mut counter = OpCounter::new();
    let state = init_kind
        .build(&data, args.k, args.seed, &mut counter)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let cfg = EngineConfig {
        max_iters: args.max_iters,
        k_n: args.kn.unwrap_or(0),
        batch_size: args.batch_size,
        batch_iters: args.mb_iters,
        rng_seed: args.seed,
        audit_bounds: false,
    };
    let run = match engine {
        EngineKind::Lloyd => run_lloyd(&data, state, &cfg, &mut counter),
        EngineKind::Elkan => run_elkan(&data, state, &cfg, &mut counter),
        EngineKind::MiniBatch => run_minibatch(&data, state, &cfg, &mut counter),
        EngineKind::K2Means => run_k2means(&data, state, &cfg, &mut counter),
    }
    .map_err(|e| CliError::Validation(e.to_string()))?;

    let final_energy = energy(&data, &run.state);
    let iterations = run.trace.samples.last().map(|s| s.iteration).unwrap_or(0);
    println!("seed: {}", args.seed);
    println!("method: {} init: {} k: {}", args.method, args.init, args.k);
    println!("iterations: {iterations}");
    println!("energy: {final_energy}");
    println!("total ops: {}", counter.total());

    if let Some(trace_path) = &args.trace_out {
        emit_trace_csv(&run.trace, trace_path)?;
        println!("trace: {}", trace_path.display());
    }
    if let Some(state_path) = &args.state_out {
        write_state_json(state_path, &args, &run.state, final_energy, counter.total(), iterations)?;
        println!("state: {}", state_path.display());
    }
    Ok(())
}

fn load_data(path: &Path) -> Result<Dataset, CliError> {
    if !path.exists() {
        return Err(CliError::Io(format!("no such file: {}", path.display())));
    }
    Ok(load_matrix(path)?)
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let spec_text = std::fs::read_to_string(&args.spec)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", args.spec.display())))?;
    let spec: BenchSpec = serde_json::from_str(&spec_text)
        .map_err(|e| CliError::Validation(format!("bad bench spec: {e}")))?;
    spec.validate()?;
    let data = load_data(Path::new(&spec.dataset))?;

    let parallelism = std::env::var("K2_PARALLELISM")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(args.parallelism);

    let report = if parallelism > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
        pool.install(|| run_bench(&data, &spec))?
    } else {
        run_bench(&data, &spec)?
    };
    report.write_json(&args.out)?;

    println!("dataset: {}", spec.dataset_id());
    println!("seeds: {:?}", spec.seeds);
    println!("rows: {}", report.rows.len());
    print_speedups(&report, &spec);
    println!("report: {}", args.out.display());
    Ok(())
}

fn print_speedups(report: &BenchReport, spec: &BenchSpec) {
    for &k in &spec.k {
        for &level in &spec.levels {
            let rows: Vec<ReportRow> = report
                .rows
                .iter()
                .filter(|r| r.k == k && r.level == level)
                .cloned()
                .collect();
            match speedup_at_reference(&rows) {
                Ok(speedups) => {
                    println!("k = {k}, level = {}%:", level * 100.0);
                    for s in speedups {
                        let label = MethodSpec {
                            engine: match s.method.as_str() {
                                "lloyd" => EngineKind::Lloyd,
                                "elkan" => EngineKind::Elkan,
                                "minibatch" => EngineKind::MiniBatch,
                                _ => EngineKind::K2Means,
                            },
                            init: match s.init.as_str() {
                                "kmeanspp" => InitKind::Kmeanspp,
                                "gdi" => InitKind::Gdi,
                                _ => InitKind::Random,
                            },
                            kn_grid: None,
                        }
                        .label();
                        match s.speedup {
                            Some(x) => {
                                let param = s
                                    .best_param
                                    .map(|p| format!(" (k_n = {p})"))
                                    .unwrap_or_default();
                                println!("  {label:<12} {x:.2}x{param}");
                            }
                            None => println!("  {label:<12} -"),
                        }
                    }
                }
                Err(e) => println!("k = {k}, level = {}%: {e}", level * 100.0),
            }
        }
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Validation("trials must be at least 1".into()));
    }
    let data = load_data(&args.data)?;
    let rows = compare_inits(&data, args.k, args.trials, args.max_iters)?;
    println!("seeds: 0..{}", args.trials);
    println!("k: {}", args.k);
    println!("{:<10} {:>12} {:>12} {:>14}", "init", "avg energy", "min energy", "avg init ops");
    for row in &rows {
        println!(
            "{:<10} {:>12.4} {:>12.4} {:>14.4}",
            row.init, row.avg_energy, row.min_energy, row.avg_init_ops
        );
    }
    if let Some(out) = &args.out {
        let mut bytes = serde_json::to_vec_pretty(&rows).expect("rows serialize");
        bytes.push(b'\n');
        atomic_write(out, &bytes)?;
        println!("rows: {}", out.display());
    }
    Ok(())
}
