//! Backend selection, circuit loading and timed execution.

use std::path::Path;
use std::time::{Duration, Instant};

use clap::ValueEnum;
use num_complex::Complex64;
use qcsim::circuit::{
    gen_ghz_chain, gen_random_circuit, gen_uniform_superposition, parse_circuit, parse_openqasm,
    rewrite_to_cz_basis,
};
use qcsim::distributed::{DistributedConfig, DistributedError, DistributedState};
use qcsim::pathsum::{
    compute_amplitudes, default_bisection, make_partition_plan, parse_partition_spec,
    CoefficientRequest, PartitionPlan, PathSumConfig, PathSumError,
};
use qcsim::statevector::{ExpectationReport, DEFAULT_MEMORY_BUDGET};
use qcsim::{BitString, Circuit, EncodedState, SimError, StateVector};
use serde::Serialize;
use thiserror::Error;

/// Timed repetitions per measurement; the median is reported.
pub const REPETITIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Adaptive,
    Pathsum,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Adaptive => "adaptive",
            Backend::Pathsum => "pathsum",
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Distributed(#[from] DistributedError),
    #[error(transparent)]
    PathSum(#[from] PathSumError),
    #[error(transparent)]
    BitString(#[from] qcsim::bits::BitStringError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl HarnessError {
    /// Usage errors exit with 2, everything else with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// True when the engine refused to allocate the state.
    pub fn is_memory_refusal(&self) -> bool {
        matches!(
            self,
            HarnessError::Sim(SimError::MemoryBudget { .. })
                | HarnessError::Distributed(DistributedError::Sim(SimError::MemoryBudget { .. }))
                | HarnessError::PathSum(PathSumError::Budget { .. })
        )
    }
}

/// Reads a native-format or OpenQASM 2.0 file; QASM is recognised by the
/// `.qasm` extension or an `OPENQASM` header.
pub fn load_circuit(path: &Path) -> Result<Circuit, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let is_qasm =
        path.extension().is_some_and(|e| e == "qasm") || text.trim_start().starts_with("OPENQASM");
    let mut c = if is_qasm {
        parse_openqasm(&text)
            .map_err(|e| HarnessError::Parse(format!("{}: {e}", path.display())))?
    } else {
        parse_circuit(&text).map_err(|e| HarnessError::Parse(format!("{}: {e}", path.display())))?
    };
    if let Some(stem) = path.file_stem() {
        c.set_name(stem.to_string_lossy());
    }
    Ok(c)
}

/// Builds a circuit from `ghz:N`, `uniform:N` or `random:RxC:DEPTH:SEED`.
pub fn generate_circuit(spec: &str) -> Result<Circuit, HarnessError> {
    let bad = || {
        HarnessError::Usage(format!(
            "bad generator {spec:?}; use ghz:N, uniform:N or random:RxC:DEPTH:SEED"
        ))
    };
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    let made = match parts.as_slice() {
        ["ghz", n] => gen_ghz_chain(num(n)?),
        ["uniform", n] => gen_uniform_superposition(num(n)?),
        ["random", grid, depth, seed] => {
            let (r, c) = grid.split_once('x').ok_or_else(bad)?;
            let seed = seed.parse::<u64>().map_err(|_| bad())?;
            gen_random_circuit(num(r)?, num(c)?, num(depth)?, seed)
        }
        _ => return Err(bad()),
    };
    made.map_err(|e| HarnessError::Usage(e.to_string()))
}

/// Which coefficients a path-sum run extracts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetSpec {
    /// The first `M` basis states.
    Coeffs(u128),
    /// Comma-separated bitstrings, `all0` or `all1`.
    List(Vec<String>),
}

impl TargetSpec {
    pub fn parse_list(s: &str) -> TargetSpec {
        TargetSpec::List(
            s.split(',')
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect(),
        )
    }

    /// One bitstring per non-empty line.
    pub fn from_file(path: &Path) -> Result<TargetSpec, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(TargetSpec::List(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect(),
        ))
    }

    pub fn request(&self, n: usize) -> Result<CoefficientRequest, HarnessError> {
        match self {
            &TargetSpec::Coeffs(m) => Ok(CoefficientRequest::First(m)),
            TargetSpec::List(items) => items
                .iter()
                .map(|t| match t.as_str() {
                    "all0" => BitString::zeros(n),
                    "all1" => BitString::ones(n),
                    s => s.parse::<BitString>(),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(CoefficientRequest::Explicit)
                .map_err(|e| HarnessError::Usage(format!("targets: {e}"))),
        }
    }

    /// `M`, the number of requested coefficients.
    pub fn count(&self) -> u128 {
        match self {
            TargetSpec::Coeffs(m) => *m,
            TargetSpec::List(items) => items.len() as u128,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub backend: Backend,
    pub ranks: usize,
    pub threads: usize,
    pub partitions: Option<String>,
    pub targets: Option<TargetSpec>,
    pub mem_budget: u128,
    /// Measure `<Q_x>`, `<Q_y>`, `<Q_z>` of every qubit after the circuit.
    pub expectations: bool,
    pub repetitions: usize,
}

impl RunOptions {
    pub fn new(backend: Backend) -> Self {
        RunOptions {
            backend,
            ranks: 1,
            threads: 1,
            partitions: None,
            targets: None,
            mem_budget: DEFAULT_MEMORY_BUDGET,
            expectations: true,
            repetitions: REPETITIONS,
        }
    }

    /// Rejects flag combinations the backend cannot honour.
    pub fn check(&self) -> Result<(), HarnessError> {
        if self.ranks == 0 || !self.ranks.is_power_of_two() {
            return Err(HarnessError::Usage(format!(
                "--ranks must be a power of two, got {}",
                self.ranks
            )));
        }
        if self.threads == 0 {
            return Err(HarnessError::Usage("--threads must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(HarnessError::Usage(
                "at least one repetition is needed".into(),
            ));
        }
        match self.backend {
            Backend::Pathsum => Ok(()),
            b if self.partitions.is_some() || self.targets.is_some() => {
                Err(HarnessError::Usage(format!(
                "--partitions, --coeffs and --targets only apply to the pathsum backend, not {}",
                b.name()
            )))
            }
            Backend::Adaptive if self.ranks > 1 => Err(HarnessError::Usage(
                "the adaptive backend runs on a single rank".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub circuit: String,
    pub n_qubits: usize,
    pub backend: Backend,
    pub ranks: usize,
    pub threads: usize,
    /// Gates executed plus one operation per measured qubit.
    pub gate_ops: usize,
    pub elapsed: Duration,
    pub expectations: Option<ExpectationReport>,
    /// Path-sum coefficients.
    pub amplitudes: Vec<(BitString, Complex64)>,
    pub partitions: Option<String>,
    pub s: Option<usize>,
    pub m: Option<u128>,
    /// Final state of the exact backend on one rank.
    pub state: Option<StateVector>,
    pub path_evals: Option<u64>,
}

fn median(mut times: Vec<Duration>) -> Duration {
    times.sort_unstable();
    times[times.len() / 2]
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))
}

/// Formats blocks as `0-3;4,6`.
pub fn format_partitions(blocks: &[Vec<usize>]) -> String {
    blocks
        .iter()
        .map(|b| {
            let mut parts = Vec::new();
            let mut i = 0;
            while i < b.len() {
                let mut j = i;
                while j + 1 < b.len() && b[j + 1] == b[j] + 1 {
                    j += 1;
                }
                parts.push(if j > i {
                    format!("{}-{}", b[i], b[j])
                } else {
                    b[i].to_string()
                });
                i = j + 1;
            }
            parts.join(",")
        })
        .collect::<Vec<_>>()
        .join(";")
}

/// Parses `spec`, or bisects the register when it is absent, and plans `c`
/// (already in the CZ basis).
pub fn plan_for(c: &Circuit, spec: Option<&str>) -> Result<PartitionPlan, HarnessError> {
    let blocks = match spec {
        Some(s) => parse_partition_spec(s).map_err(|e| HarnessError::Usage(e.to_string()))?,
        None => default_bisection(c.n_qubits()).map_err(|e| HarnessError::Usage(e.to_string()))?,
    };
    Ok(make_partition_plan(c, &blocks).map_err(PathSumError::from)?)
}

/// Runs `c` `opts.repetitions` times and reports the median wall time of the
/// gate sequence plus the expectation measurement. Parsing and state
/// allocation are outside the timed region.
pub fn execute(c: &Circuit, opts: &RunOptions) -> Result<RunOutcome, HarnessError> {
    opts.check()?;
    let n = c.n_qubits();
    let mut out = RunOutcome {
        circuit: c.name().to_string(),
        n_qubits: n,
        backend: opts.backend,
        ranks: opts.ranks,
        threads: opts.threads,
        gate_ops: c.len() + if opts.expectations { n } else { 0 },
        elapsed: Duration::ZERO,
        expectations: None,
        amplitudes: Vec::new(),
        partitions: None,
        s: None,
        m: None,
        state: None,
        path_evals: None,
    };
    let mut times = Vec::with_capacity(opts.repetitions);
    match opts.backend {
        Backend::Exact if opts.ranks == 1 => {
            let pool = pool(opts.threads)?;
            for _ in 0..opts.repetitions {
                let mut s = StateVector::with_budget(n, opts.mem_budget)?;
                let t = Instant::now();
                let report = pool.install(|| -> Result<_, SimError> {
                    s.apply_circuit(c)?;
                    Ok(opts.expectations.then(|| s.expectation_report()))
                })?;
                times.push(t.elapsed());
                out.expectations = report;
                out.state = Some(s);
            }
        }
        Backend::Exact => {
            let config = DistributedConfig {
                threads_per_rank: opts.threads,
                budget_per_rank: opts.mem_budget / opts.ranks as u128,
                ..DistributedConfig::new(opts.ranks)
            };
            for _ in 0..opts.repetitions {
                let mut d = DistributedState::new(n, config)?;
                let t = Instant::now();
                d.apply_circuit(c)?;
                let report = if opts.expectations {
                    Some(d.expectation_report()?)
                } else {
                    None
                };
                times.push(t.elapsed());
                out.expectations = report;
            }
        }
        Backend::Adaptive => {
            let pool = pool(opts.threads)?;
            for _ in 0..opts.repetitions {
                let mut s = EncodedState::with_budget(n, opts.mem_budget)?;
                let t = Instant::now();
                let report = pool.install(|| -> Result<_, SimError> {
                    s.apply_circuit(c)?;
                    Ok(opts.expectations.then(|| s.expectation_report()))
                })?;
                times.push(t.elapsed());
                out.expectations = report;
            }
        }
        Backend::Pathsum => {
            let cz = rewrite_to_cz_basis(c);
            let plan = plan_for(&cz, opts.partitions.as_deref())?;
            let targets = opts
                .targets
                .clone()
                .unwrap_or_else(|| TargetSpec::parse_list("all0,all1"));
            let req = targets.request(n)?;
            let config = PathSumConfig {
                ranks: opts.ranks,
                threads_per_rank: opts.threads,
                budget: opts.mem_budget,
                ..PathSumConfig::default()
            };
            out.gate_ops = cz.len();
            out.partitions = Some(format_partitions(plan.partitions()));
            out.s = Some(plan.s());
            for _ in 0..opts.repetitions {
                let t = Instant::now();
                let r = compute_amplitudes(&cz, &plan, &req, &config)?;
                times.push(t.elapsed());
                out.m = Some(r.targets.len() as u128);
                out.path_evals = Some(r.stats.subcircuit_evals);
                out.amplitudes = r.targets.into_iter().zip(r.amplitudes).collect();
            }
        }
    }
    out.elapsed = median(times);
    Ok(out)
}
