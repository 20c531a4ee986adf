//! Path-sum simulation over qubit partitions.
//!
//! Every CZ whose endpoints sit in different partitions is written as
//! `CZ = 1/2 sum_{s = ±1} d(s) ⊗ d(s)` with a single-qubit diagonal `d(s)`.
//! Fixing one sign per cut gate leaves a product of independent subcircuits,
//! so an amplitude `<z|C|0>` is `2^-S` times the sum over all `2^S` sign
//! vectors of the product of the per-partition amplitudes `<z_p|W_p(s)|0_p>`.
//! Memory scales with the widest partition instead of the whole register.

mod partition;

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use num_complex::Complex64;
use thiserror::Error;

use crate::bits::{BitString, BitStringError};
use crate::circuit::{Circuit, CircuitError, Gate};
use crate::statevector::{kernels, memory_bytes, DEFAULT_MEMORY_BUDGET};

pub use partition::{
    default_bisection, make_partition_plan, parse_partition_spec, PartitionError, PartitionPlan,
};

/// Cut-gate count above which [`compute_amplitudes`] refuses to run.
pub const DEFAULT_MAX_CUT_GATES: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathSumError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("partition plan was built for a different circuit")]
    PlanMismatch,
    #[error("assignment has {got} sign(s), plan cuts {expected} gate(s)")]
    AssignmentLength { expected: usize, got: usize },
    #[error("path signs must be +1 or -1, got {0}")]
    BadSign(i8),
    #[error("coefficient request is empty")]
    EmptyRequest,
    #[error("target {index} has width {got}, expected {expected}")]
    TargetWidth {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("{requested} coefficient(s) requested but the register has only 2^{n_qubits}")]
    TooManyTargets { requested: u128, n_qubits: usize },
    #[error("{s} cut gates exceed the limit of {max}")]
    TooManyPaths { s: usize, max: usize },
    #[error("rank count must be a power of two, got {0}")]
    Ranks(usize),
    #[error("path sum needs {required} bytes, budget is {budget} bytes")]
    Budget { required: u128, budget: u128 },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    BitString(#[from] BitStringError),
}

/// `x = π/4 - (i/2) ln(1 + √2)`, a solution of `cos 2x = i`.
pub fn path_x() -> Complex64 {
    Complex64::new(FRAC_PI_4, -0.5 * (1.0 + SQRT_2).ln())
}

/// Diagonal `(e^{iθ}, e^{-iθ})` with `θ = x s - π/4` for a sign `s = ±1`.
///
/// # Panics
/// If `s` is not `+1` or `-1`.
pub fn cz_path_diagonal(s: i8) -> (Complex64, Complex64) {
    assert!(s == 1 || s == -1, "path sign must be +1 or -1, got {s}");
    let theta = path_x() * f64::from(s) - FRAC_PI_4;
    let i = Complex64::i();
    ((i * theta).exp(), (-i * theta).exp())
}

/// The two DIAG1 gates replacing `CZ(a, b)` on path sign `s`, one per
/// endpoint. The factor 1/2 is not included.
pub fn cz_path_gates(s: i8, a: usize, b: usize) -> [Gate; 2] {
    let (d0, d1) = cz_path_diagonal(s);
    [Gate::diag1(a, d0, d1), Gate::diag1(b, d0, d1)]
}

/// One sign per cut gate, in the order of [`PartitionPlan::cut_gates`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathAssignment {
    s: Vec<i8>,
}

impl PathAssignment {
    pub fn new(s: Vec<i8>) -> Result<Self, PathSumError> {
        if let Some(&bad) = s.iter().find(|&&v| v != 1 && v != -1) {
            return Err(PathSumError::BadSign(bad));
        }
        Ok(PathAssignment { s })
    }

    /// Path number `index` of `2^len`: bit `k` clear means `s_k = +1`.
    pub fn from_index(index: u64, len: usize) -> Self {
        let s = (0..len)
            .map(|k| {
                if k < 64 && (index >> k) & 1 == 1 {
                    -1
                } else {
                    1
                }
            })
            .collect();
        PathAssignment { s }
    }

    pub fn signs(&self) -> &[i8] {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Gates of one partition for one path, in partition-local qubit indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Subcircuit {
    pub partition: usize,
    /// Global qubit of each local index.
    pub qubits: Vec<usize>,
    pub circuit: Circuit,
}

#[derive(Debug, Clone)]
enum Op {
    Fixed(Gate),
    Cut { k: usize, q: usize },
}

/// Per-partition gate list with cut CZs left as placeholders.
#[derive(Debug, Clone)]
struct Template {
    qubits: Vec<usize>,
    ops: Vec<Op>,
}

fn templates(c: &Circuit, plan: &PartitionPlan) -> Vec<Template> {
    let mut out: Vec<Template> = plan
        .partitions()
        .iter()
        .map(|p| Template {
            qubits: p.clone(),
            ops: Vec::new(),
        })
        .collect();
    let mut cuts = plan.cut_gates().iter().enumerate().peekable();
    for (index, g) in c.gates().iter().enumerate() {
        if let Some((k, _)) = cuts.next_if(|&(_, &i)| i == index) {
            for &q in g.qubits() {
                out[plan.block_of(q)].ops.push(Op::Cut {
                    k,
                    q: plan.local_bit(q),
                });
            }
        } else {
            let p = plan.block_of(g.qubits()[0]);
            out[p]
                .ops
                .push(Op::Fixed(g.remapped(|q| plan.local_bit(q))));
        }
    }
    out
}

fn check_plan(c: &Circuit, plan: &PartitionPlan) -> Result<(), PathSumError> {
    if plan.n_qubits() != c.n_qubits() || plan.n_gates() != c.len() {
        return Err(PathSumError::PlanMismatch);
    }
    let fresh = make_partition_plan(c, plan.partitions())?;
    if fresh != *plan {
        return Err(PathSumError::PlanMismatch);
    }
    Ok(())
}

/// The per-partition subcircuits `W_p(a)`: single-qubit gates and internal
/// CZs as in `c`, each cut CZ replaced by its path gates in place.
pub fn split_circuit(
    c: &Circuit,
    plan: &PartitionPlan,
    a: &PathAssignment,
) -> Result<Vec<Subcircuit>, PathSumError> {
    check_plan(c, plan)?;
    if a.len() != plan.s() {
        return Err(PathSumError::AssignmentLength {
            expected: plan.s(),
            got: a.len(),
        });
    }
    let diag = [cz_path_diagonal(1), cz_path_diagonal(-1)];
    templates(c, plan)
        .into_iter()
        .enumerate()
        .map(|(p, t)| {
            let gates = t.ops.iter().map(|op| match *op {
                Op::Fixed(ref g) => g.clone(),
                Op::Cut { k, q } => {
                    let (d0, d1) = diag[usize::from(a.s[k] < 0)];
                    Gate::diag1(q, d0, d1)
                }
            });
            let name = format!("{}.p{p}", c.name());
            Ok(Subcircuit {
                partition: p,
                circuit: Circuit::from_gates(t.qubits.len(), gates.collect(), name)?,
                qubits: t.qubits,
            })
        })
        .collect()
}

fn reset(buf: &mut Vec<Complex64>, width: usize) {
    buf.clear();
    buf.resize(1usize << width, Complex64::new(0.0, 0.0));
    buf[0] = Complex64::new(1.0, 0.0);
}

/// `<z|W|0>` for each partition-local target `z`. The vector `W|0>` is
/// built once; with path gates it is generally not normalized.
pub fn eval_subcircuit(
    w: &Subcircuit,
    targets: &[BitString],
) -> Result<Vec<Complex64>, PathSumError> {
    let width = w.circuit.n_qubits();
    for (index, z) in targets.iter().enumerate() {
        if z.width() != width {
            return Err(PathSumError::TargetWidth {
                index,
                expected: width,
                got: z.width(),
            });
        }
    }
    let mut buf = Vec::new();
    reset(&mut buf, width);
    for g in w.circuit.gates() {
        kernels::apply_gate(&mut buf, g);
    }
    Ok(targets.iter().map(|z| buf[z.index()]).collect())
}

/// Which coefficients to extract.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoefficientRequest {
    /// Listed full-width bitstrings.
    Explicit(Vec<BitString>),
    /// Basis states `0 .. M-1`.
    First(u128),
    /// `0...0` and `1...1`.
    Extremes,
}

impl CoefficientRequest {
    /// The concrete targets for an `n`-qubit register.
    pub fn resolve(&self, n: usize) -> Result<Vec<BitString>, PathSumError> {
        let targets = match self {
            CoefficientRequest::Explicit(list) => {
                for (index, z) in list.iter().enumerate() {
                    if z.width() != n {
                        return Err(PathSumError::TargetWidth {
                            index,
                            expected: n,
                            got: z.width(),
                        });
                    }
                }
                list.clone()
            }
            &CoefficientRequest::First(m) => {
                if n < 128 && m > 1u128 << n {
                    return Err(PathSumError::TooManyTargets {
                        requested: m,
                        n_qubits: n,
                    });
                }
                (0..m)
                    .map(|v| BitString::new(n, v))
                    .collect::<Result<_, _>>()?
            }
            CoefficientRequest::Extremes => vec![BitString::zeros(n)?, BitString::ones(n)?],
        };
        if targets.is_empty() {
            return Err(PathSumError::EmptyRequest);
        }
        Ok(targets)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSumConfig {
    /// Logical ranks sharing the paths; a power of two, capped at `2^S`.
    pub ranks: usize,
    pub threads_per_rank: usize,
    pub budget: u128,
    pub max_cut_gates: usize,
}

impl Default for PathSumConfig {
    fn default() -> Self {
        PathSumConfig {
            ranks: 1,
            threads_per_rank: 1,
            budget: DEFAULT_MEMORY_BUDGET,
            max_cut_gates: DEFAULT_MAX_CUT_GATES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PathSumStats {
    pub paths: u64,
    pub subcircuit_evals: u64,
    pub ranks_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSumResult {
    pub targets: Vec<BitString>,
    pub amplitudes: Vec<Complex64>,
    pub stats: PathSumStats,
}

/// Streaming pairwise sum: leaves pushed in order reduce as a perfect binary
/// tree, so any aligned power-of-two split of the leaves sums identically.
struct TreeSum {
    stack: Vec<(u32, Vec<Complex64>)>,
}

impl TreeSum {
    fn new() -> Self {
        TreeSum { stack: Vec::new() }
    }

    fn push(&mut self, mut v: Vec<Complex64>) {
        let mut level = 0;
        while let Some((top, _)) = self.stack.last() {
            if *top != level {
                break;
            }
            let (_, mut left) = self.stack.pop().expect("non-empty stack");
            for (l, r) in left.iter_mut().zip(&v) {
                *l += r;
            }
            v = left;
            level += 1;
        }
        self.stack.push((level, v));
    }

    /// The root; the leaf count must have been a power of two.
    fn finish(mut self) -> Vec<Complex64> {
        assert_eq!(self.stack.len(), 1, "leaf count is not a power of two");
        self.stack.pop().expect("one root").1
    }
}

struct RankOutput {
    sum: Vec<Complex64>,
    paths: u64,
    evals: u64,
}

fn run_paths(
    tpl: &[Template],
    local_targets: &[Vec<usize>],
    m: usize,
    s: usize,
    range: std::ops::Range<u64>,
) -> RankOutput {
    let diag = [cz_path_diagonal(1), cz_path_diagonal(-1)];
    let weight = (-(s as f64)).exp2();
    let mut buf = Vec::new();
    let mut tree = TreeSum::new();
    let mut evals = 0;
    for path in range.clone() {
        let mut leaf = vec![Complex64::new(weight, 0.0); m];
        for (t, idx) in tpl.iter().zip(local_targets) {
            reset(&mut buf, t.qubits.len());
            for op in &t.ops {
                match *op {
                    Op::Fixed(ref g) => kernels::apply_gate(&mut buf, g),
                    Op::Cut { k, q } => {
                        let (d0, d1) = diag[((path >> k) & 1) as usize];
                        kernels::apply_gate(&mut buf, &Gate::diag1(q, d0, d1));
                    }
                }
            }
            evals += 1;
            for (l, &i) in leaf.iter_mut().zip(idx) {
                *l *= buf[i];
            }
        }
        tree.push(leaf);
    }
    RankOutput {
        sum: tree.finish(),
        paths: range.end - range.start,
        evals,
    }
}

/// `<z|C|0>` for each requested `z`, summed over all `2^S` paths.
///
/// Paths split into equal contiguous ranges over the ranks, each reduced by
/// the same pairwise tree, so results are bitwise identical for any rank and
/// thread count.
pub fn compute_amplitudes(
    c: &Circuit,
    plan: &PartitionPlan,
    req: &CoefficientRequest,
    config: &PathSumConfig,
) -> Result<PathSumResult, PathSumError> {
    check_plan(c, plan)?;
    let targets = req.resolve(c.n_qubits())?;
    let s = plan.s();
    if s > config.max_cut_gates.min(62) {
        return Err(PathSumError::TooManyPaths {
            s,
            max: config.max_cut_gates.min(62),
        });
    }
    if !config.ranks.is_power_of_two() {
        return Err(PathSumError::Ranks(config.ranks));
    }
    let total = 1u64 << s;
    let ranks = (config.ranks as u64).min(total) as usize;
    let m = targets.len();
    let widest = plan.block_sizes().into_iter().max().unwrap_or(0);
    // one work vector plus the reduction stack per rank, and the result
    let per_rank = memory_bytes(widest).saturating_add(16 * m as u128 * (s as u128 + 2));
    let required = per_rank
        .saturating_mul(ranks as u128)
        .saturating_add(16 * m as u128);
    if widest >= 120 || required > config.budget {
        return Err(PathSumError::Budget {
            required,
            budget: config.budget,
        });
    }

    let tpl = templates(c, plan);
    let local_targets: Vec<Vec<usize>> = plan
        .partitions()
        .iter()
        .map(|p| targets.iter().map(|z| z.extract(p)).collect())
        .collect();
    let chunk = total / ranks as u64;
    let pools = (0..ranks)
        .map(|rank| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads_per_rank.max(1))
                .thread_name(move |i| format!("path{rank}-{i}"))
                .build()
                .map_err(|e| PathSumError::ThreadPool(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let work = |rank: usize| {
        let range = rank as u64 * chunk..(rank as u64 + 1) * chunk;
        pools[rank].install(|| run_paths(&tpl, &local_targets, m, s, range))
    };
    let outputs: Vec<RankOutput> = if ranks == 1 {
        vec![work(0)]
    } else {
        std::thread::scope(|scope| {
            let work = &work;
            let handles: Vec<_> = (0..ranks)
                .map(|rank| scope.spawn(move || work(rank)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("path rank panicked"))
                .collect()
        })
    };

    let mut stats = PathSumStats {
        ranks_used: ranks,
        ..PathSumStats::default()
    };
    let mut tree = TreeSum::new();
    for out in outputs {
        stats.paths += out.paths;
        stats.subcircuit_evals += out.evals;
        tree.push(out.sum);
    }
    Ok(PathSumResult {
        targets,
        amplitudes: tree.finish(),
        stats,
    })
}

/// Unitless cost model for a path-sum run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    /// `2^S · P · max(D_max, M) / (R · T)`
    pub time_units: f64,
    /// `R · max(D_max, M)`
    pub space_units: f64,
}

/// Evaluates the cost model; `m`, `ranks` and `threads` below 1 count as 1.
pub fn cost_estimate(plan: &PartitionPlan, m: u64, ranks: u64, threads: u64) -> CostEstimate {
    let d_max = plan.subspace_dims().into_iter().fold(0.0, f64::max);
    let width = d_max.max(m.max(1) as f64);
    let (r, t) = (ranks.max(1) as f64, threads.max(1) as f64);
    CostEstimate {
        time_units: (plan.s() as f64).exp2() * plan.n_partitions() as f64 * width / (r * t),
        space_units: r * width,
    }
}
