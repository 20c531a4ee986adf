//! Circuit families used for validation and benchmarking.

use std::f64::consts::PI;

use thiserror::Error;

use super::{Circuit, Gate, GateKind};
use crate::rng::Prng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("need at least {min} qubit(s), got {got}")]
    TooFewQubits { min: usize, got: usize },
    #[error("a {rows}x{cols} grid has no pair of adjacent qubits for CZ")]
    GridTooSmall { rows: usize, cols: usize },
    #[error("depth must be at least 1")]
    ZeroDepth,
}

/// One Hadamard per qubit.
pub fn gen_uniform_superposition(n: usize) -> Result<Circuit, GeneratorError> {
    if n < 1 {
        return Err(GeneratorError::TooFewQubits { min: 1, got: n });
    }
    let gates = (0..n).map(Gate::h).collect();
    Ok(Circuit::from_gates(n, gates, format!("uniform_{n}")).expect("valid qubits"))
}

/// `H(0), CNOT(0,1), CNOT(1,2), ..., CNOT(n-2,n-1)`.
pub fn gen_ghz_chain(n: usize) -> Result<Circuit, GeneratorError> {
    if n < 2 {
        return Err(GeneratorError::TooFewQubits { min: 2, got: n });
    }
    let gates = std::iter::once(Gate::h(0))
        .chain((0..n - 1).map(|i| Gate::cnot(i, i + 1)))
        .collect();
    Ok(Circuit::from_gates(n, gates, format!("ghz_{n}")).expect("valid qubits"))
}

#[derive(Debug, Clone, Copy)]
enum Direction {
    Horizontal,
    Vertical,
}

/// CZ pairs of one grid tiling. Qubit `(r, c)` has index `r * cols + c`.
///
/// A horizontal tiling couples `(r, c)-(r, c+1)` for every `c` of parity
/// `pair` and every `r` of parity `line`; vertical tilings are the transpose.
fn tiling(
    rows: usize,
    cols: usize,
    dir: Direction,
    pair: usize,
    line: usize,
) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            match dir {
                Direction::Horizontal if c + 1 < cols && c % 2 == pair && r % 2 == line => {
                    out.push((r * cols + c, r * cols + c + 1));
                }
                Direction::Vertical if r + 1 < rows && r % 2 == pair && c % 2 == line => {
                    out.push((r * cols + c, (r + 1) * cols + c));
                }
                _ => {}
            }
        }
    }
    out
}

/// The eight tilings in cycle order, with those empty on this grid dropped.
/// Together they cover every grid edge exactly once.
fn cz_tilings(rows: usize, cols: usize) -> Vec<Vec<(usize, usize)>> {
    const ORDER: [(usize, usize); 4] = [(0, 0), (1, 1), (0, 1), (1, 0)];
    [Direction::Horizontal, Direction::Vertical]
        .into_iter()
        .flat_map(|d| ORDER.iter().map(move |&(p, l)| tiling(rows, cols, d, p, l)))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Random circuit on a `rows x cols` qubit grid.
///
/// Cycle 0 is a Hadamard on every qubit. Each following cycle applies the
/// next CZ tiling and, on every qubit that had a CZ in the previous cycle but
/// none in this one, a single-qubit gate from {T, V, VY}: T if the qubit has
/// not yet received one after its Hadamard, otherwise one of the two gates
/// different from its previous one, picked with one PRNG draw.
///
/// `depth` counts greedy layers after the Hadamard layer, so
/// `compute_depth(&c).depth == depth + 1`. A cycle raises the greedy depth by
/// at most one; cycles are appended until the next one would overshoot.
/// The output is a pure function of the arguments.
pub fn gen_random_circuit(
    rows: usize,
    cols: usize,
    depth: usize,
    seed: u64,
) -> Result<Circuit, GeneratorError> {
    if depth == 0 {
        return Err(GeneratorError::ZeroDepth);
    }
    let n = rows * cols;
    let tilings = cz_tilings(rows, cols);
    if tilings.is_empty() {
        return Err(GeneratorError::GridTooSmall { rows, cols });
    }

    let mut rng = Prng::new(seed);
    let mut gates: Vec<Gate> = (0..n).map(Gate::h).collect();
    // next free greedy layer per qubit, after the Hadamard layer
    let mut next_free = vec![1usize; n];
    let mut had_cz = vec![false; n];
    let mut last_single: Vec<Option<GateKind>> = vec![None; n];
    const CHOICES: [GateKind; 3] = [GateKind::T, GateKind::V, GateKind::Vy];

    for cycle in 0.. {
        let mut has_cz = vec![false; n];
        let mut cycle_gates = Vec::new();
        let mut singles = last_single.clone();
        for &(a, b) in &tilings[cycle % tilings.len()] {
            cycle_gates.push(Gate::cz(a, b));
            has_cz[a] = true;
            has_cz[b] = true;
        }
        for q in 0..n {
            if !had_cz[q] || has_cz[q] {
                continue;
            }
            let kind = match singles[q] {
                None => GateKind::T,
                Some(prev) => {
                    let others: Vec<GateKind> =
                        CHOICES.iter().copied().filter(|&k| k != prev).collect();
                    others[rng.below(2) as usize]
                }
            };
            cycle_gates.push(Gate::new(kind, &[q], &[]).expect("fixed gate"));
            singles[q] = Some(kind);
        }

        let mut free = next_free.clone();
        for g in &cycle_gates {
            let layer = g
                .qubits()
                .iter()
                .map(|&q| free[q])
                .max()
                .expect("gate has qubits");
            for &q in g.qubits() {
                free[q] = layer + 1;
            }
        }
        if free.iter().copied().max().unwrap_or(0) > depth + 1 {
            break;
        }
        gates.extend(cycle_gates);
        next_free = free;
        had_cz = has_cz;
        last_single = singles;
    }

    Ok(
        Circuit::from_gates(n, gates, format!("random_{rows}x{cols}_d{depth}_s{seed}"))
            .expect("valid qubits"),
    )
}

/// Seeded soup of `count` gates drawn from every unitary kind, with angles
/// uniform in `[-pi, pi)`. Two-qubit kinds need `n >= 2`.
pub fn random_gate_sequence(n: usize, count: usize, seed: u64) -> Circuit {
    assert!(n >= 1, "need at least one qubit");
    let mut rng = Prng::new(seed);
    let kinds: Vec<GateKind> = GateKind::ALL
        .iter()
        .copied()
        .filter(|k| *k != GateKind::Diag1 && (n >= 2 || k.arity() == 1))
        .collect();
    let mut c = Circuit::new(n, format!("soup_{n}_{count}_s{seed}")).expect("n >= 1");
    for _ in 0..count {
        let kind = kinds[rng.below(kinds.len() as u64) as usize];
        let a = rng.below(n as u64) as usize;
        let qubits = if kind.arity() == 2 {
            let b = (a + 1 + rng.below(n as u64 - 1) as usize) % n;
            vec![a, b]
        } else {
            vec![a]
        };
        let params: Vec<f64> = (0..kind.param_count())
            .map(|_| (2.0 * rng.next_f64() - 1.0) * PI)
            .collect();
        c.push(Gate::new(kind, &qubits, &params).expect("well-formed gate"))
            .expect("in range");
    }
    c
}
