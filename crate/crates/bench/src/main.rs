use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qcsim::statevector::{write_state_dump, DEFAULT_MEMORY_BUDGET};
use qcsim_bench::estimate::{decimal_bytes, estimate, human_bytes};
use qcsim_bench::record::{bench_ghz, bench_random, write_csv, BenchRecord, GhzSweep, RandomSweep};
use qcsim_bench::runner::{
    execute, generate_circuit, load_circuit, Backend, HarnessError, RunOptions, TargetSpec,
};
use qcsim_bench::validate::validate;
use qcsim_bench::RunReport;

/// Simulate quantum circuits and benchmark the simulator.
#[derive(Parser)]
#[command(name = "qcsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one circuit and write amplitudes or expectation values as JSON.
    Run(RunArgs),
    /// Run the built-in validation suite; exits with 1 if any check fails.
    Validate {
        #[arg(long, default_value_t = 20)]
        max_qubits: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Weak-scaling sweep over GHZ chains.
    BenchGhz(GhzArgs),
    /// Path-sum sweep over random-circuit depth.
    BenchRandom(RandomArgs),
    /// Print the memory a backend needs for N qubits.
    Estimate {
        #[arg(long, short)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Backend::Exact)]
        backend: Backend,
        #[arg(long, default_value_t = 1)]
        ranks: usize,
        /// Path-sum blocks; a bisection if omitted.
        #[arg(long)]
        partitions: Option<String>,
        #[arg(long, default_value_t = 1)]
        coeffs: u128,
    },
}

#[derive(Args)]
struct Resources {
    #[arg(long, default_value_t = 1)]
    ranks: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Bytes of state storage allowed.
    #[arg(long, default_value_t = DEFAULT_MEMORY_BUDGET)]
    mem_budget: u128,
}

#[derive(Args)]
struct RunArgs {
    /// Native-format or OpenQASM 2.0 file.
    #[arg(
        long,
        conflicts_with = "generate",
        required_unless_present = "generate"
    )]
    circuit: Option<PathBuf>,
    /// Built-in circuit: ghz:N, uniform:N or random:RxC:DEPTH:SEED.
    #[arg(long)]
    generate: Option<String>,
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
    #[command(flatten)]
    resources: Resources,
    /// Path-sum blocks such as "0-20;21-41".
    #[arg(long)]
    partitions: Option<String>,
    /// Extract the first M basis coefficients.
    #[arg(long, conflicts_with_all = ["targets", "targets_file"])]
    coeffs: Option<u128>,
    /// Comma-separated bitstrings, all0 or all1.
    #[arg(long, conflicts_with = "targets_file")]
    targets: Option<String>,
    /// File with one bitstring per line.
    #[arg(long)]
    targets_file: Option<PathBuf>,
    /// Write the final exact state as a binary dump.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GhzArgs {
    #[arg(long)]
    n_min: usize,
    #[arg(long)]
    n_max: usize,
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
    #[command(flatten)]
    resources: Resources,
    /// N whose time per gate is the unit of normalized_time; n_min if omitted.
    #[arg(long)]
    normalize_at: Option<usize>,
    /// Double the threads for every added qubit.
    #[arg(long)]
    scale_threads: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    depth_min: usize,
    #[arg(long)]
    depth_max: usize,
    #[arg(long)]
    partitions: Option<String>,
    #[arg(long, default_value_t = 1)]
    coeffs: u128,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    resources: Resources,
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, HarnessError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| {
            HarnessError::Io {
                path: p.display().to_string(),
                source,
            }
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_err(path: Option<&Path>) -> impl Fn(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.map_or("<stdout>".into(), |p| p.display().to_string()),
        source,
    }
}

fn write_json(value: &impl serde::Serialize, path: Option<&Path>) -> Result<(), HarnessError> {
    let mut w = output(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path)(e.into()))?;
    writeln!(w).map_err(io_err(path))
}

fn emit_rows(rows: &[BenchRecord], path: Option<&Path>) -> Result<(), HarnessError> {
    write_csv(rows, output(path)?).map_err(|e| io_err(path)(io::Error::other(e)))
}

fn run(args: RunArgs) -> Result<(), HarnessError> {
    let c = match (&args.circuit, &args.generate) {
        (Some(p), _) => load_circuit(p)?,
        (None, Some(spec)) => generate_circuit(spec)?,
        (None, None) => {
            return Err(HarnessError::Usage(
                "--circuit or --generate is required".into(),
            ))
        }
    };
    let targets = match (args.coeffs, &args.targets, &args.targets_file) {
        (Some(m), _, _) => Some(TargetSpec::Coeffs(m)),
        (_, Some(list), _) => Some(TargetSpec::parse_list(list)),
        (_, _, Some(file)) => Some(TargetSpec::from_file(file)?),
        _ => None,
    };
    let opts = RunOptions {
        ranks: args.resources.ranks,
        threads: args.resources.threads,
        mem_budget: args.resources.mem_budget,
        partitions: args.partitions,
        targets,
        repetitions: 1,
        ..RunOptions::new(args.backend)
    };
    if args.dump.is_some() && (opts.backend != Backend::Exact || opts.ranks != 1) {
        return Err(HarnessError::Usage(
            "--dump needs the exact backend on one rank".into(),
        ));
    }
    let outcome = execute(&c, &opts)?;
    if let (Some(path), Some(state)) = (&args.dump, &outcome.state) {
        let file = File::create(path).map_err(io_err(Some(path)))?;
        write_state_dump(state, BufWriter::new(file)).map_err(io_err(Some(path)))?;
    }
    write_json(&RunReport::from(&outcome), args.json.as_deref())
}

fn main_inner(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Run(args) => run(args).map(|()| true),
        Command::Validate { max_qubits, json } => {
            let report = validate(max_qubits);
            write_json(&report, json.as_deref())?;
            Ok(report.pass)
        }
        Command::BenchGhz(a) => {
            let opts = RunOptions {
                ranks: a.resources.ranks,
                threads: a.resources.threads,
                mem_budget: a.resources.mem_budget,
                ..RunOptions::new(a.backend)
            };
            let sweep = GhzSweep {
                n_min: a.n_min,
                n_max: a.n_max,
                normalize_at: a.normalize_at.unwrap_or(a.n_min),
                opts,
                scale_threads: a.scale_threads,
            };
            emit_rows(&bench_ghz(&sweep)?, a.csv.as_deref()).map(|()| true)
        }
        Command::BenchRandom(a) => {
            let opts = RunOptions {
                ranks: a.resources.ranks,
                threads: a.resources.threads,
                mem_budget: a.resources.mem_budget,
                partitions: a.partitions,
                ..RunOptions::new(Backend::Pathsum)
            };
            let sweep = RandomSweep {
                rows: a.rows,
                cols: a.cols,
                depth_min: a.depth_min,
                depth_max: a.depth_max,
                seed: a.seed,
                m: a.coeffs,
                opts,
            };
            emit_rows(&bench_random(&sweep)?, a.csv.as_deref()).map(|()| true)
        }
        Command::Estimate {
            n,
            backend,
            ranks,
            partitions,
            coeffs,
        } => {
            let widest = match &partitions {
                Some(spec) => qcsim::pathsum::parse_partition_spec(spec)
                    .map_err(|e| HarnessError::Usage(e.to_string()))?
                    .iter()
                    .map(Vec::len)
                    .max()
                    .unwrap_or(0),
                None => n.div_ceil(2),
            };
            let e = estimate(n, backend, ranks, widest, coeffs)?;
            println!(
                "{} qubits, {} backend, {} rank(s): {} total ({}, {} bytes), {} per rank; {}",
                e.n_qubits,
                backend.name(),
                e.ranks,
                human_bytes(e.bytes),
                decimal_bytes(e.bytes),
                e.bytes,
                human_bytes(e.per_rank_bytes),
                e.note
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qcsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
