//! In-place gate kernels on amplitude slices.
//!
//! Qubit arguments are bit positions inside the slice. A single-qubit gate on
//! bit `q` visits the `len/2` index pairs `(i, i + 2^q)` with bit `q` of `i`
//! clear; pairs are disjoint, so splitting them across workers is race-free
//! and the result does not depend on the worker count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::{Gate, GateKind, GateMatrix};

/// Slices shorter than this are processed on the calling thread.
pub const PAR_THRESHOLD: usize = 1 << 14;
/// Fixed chunk length for reductions, so sums are bitwise reproducible.
pub const REDUCE_CHUNK: usize = 1 << 12;
const MIN_PAR_BLOCKS: usize = 64;
const MIN_PAR_LEN: usize = 1 << 10;

/// What a single-qubit gate does to one amplitude pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairOp {
    Identity,
    Swap,
    Diag(Complex64, Complex64),
    Dense([[Complex64; 2]; 2]),
}

impl PairOp {
    pub fn of(gate: &Gate) -> PairOp {
        match gate.kind() {
            GateKind::I => PairOp::Identity,
            GateKind::X => PairOp::Swap,
            _ => match gate.matrix() {
                GateMatrix::Single(m) if gate.is_diagonal() => PairOp::Diag(m[0][0], m[1][1]),
                GateMatrix::Single(m) => PairOp::Dense(m),
                GateMatrix::Two(_) => panic!("{} is not a single-qubit gate", gate.kind()),
            },
        }
    }

    #[inline(always)]
    pub fn apply(&self, a0: &mut Complex64, a1: &mut Complex64) {
        match *self {
            PairOp::Identity => {}
            PairOp::Swap => std::mem::swap(a0, a1),
            PairOp::Diag(d0, d1) => {
                *a0 *= d0;
                *a1 *= d1;
            }
            PairOp::Dense(m) => {
                let (x, y) = (*a0, *a1);
                *a0 = m[0][0] * x + m[0][1] * y;
                *a1 = m[1][0] * x + m[1][1] * y;
            }
        }
    }
}

/// Calls `f(i, a[i], a[i + 2^q])` for every index `i` with bit `q` clear.
pub fn for_each_pair<T, F>(amps: &mut [T], q: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut T, &mut T) + Sync,
{
    let half = 1usize << q;
    let block = half << 1;
    assert!(
        amps.len() >= block && amps.len().is_multiple_of(block),
        "bit {q} outside slice"
    );

    let run_block = |base: usize, chunk: &mut [T]| {
        let (lo, hi) = chunk.split_at_mut(half);
        for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
            f(base + j, a, b);
        }
    };

    if amps.len() < PAR_THRESHOLD {
        for (k, chunk) in amps.chunks_mut(block).enumerate() {
            run_block(k * block, chunk);
        }
    } else if amps.len() / block >= MIN_PAR_BLOCKS {
        amps.par_chunks_mut(block)
            .enumerate()
            .for_each(|(k, chunk)| run_block(k * block, chunk));
    } else {
        for (k, chunk) in amps.chunks_mut(block).enumerate() {
            let base = k * block;
            let (lo, hi) = chunk.split_at_mut(half);
            lo.par_iter_mut()
                .zip(hi.par_iter_mut())
                .enumerate()
                .with_min_len(MIN_PAR_LEN)
                .for_each(|(j, (a, b))| f(base + j, a, b));
        }
    }
}

/// Calls `f(i, a[i], a[i + 2^l], a[i + 2^h], a[i + 2^l + 2^h])` for every
/// index `i` with bits `l < h` both clear.
pub fn for_each_quad<T, F>(amps: &mut [T], l: usize, h: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut T, &mut T, &mut T, &mut T) + Sync,
{
    assert!(l < h);
    let (lh, hh) = (1usize << l, 1usize << h);
    let (lb, hb) = (lh << 1, hh << 1);
    assert!(
        amps.len() >= hb && amps.len().is_multiple_of(hb),
        "bit {h} outside slice"
    );

    let run_sub = |base: usize, lc: &mut [T], hc: &mut [T]| {
        let (l0, l1) = lc.split_at_mut(lh);
        let (h0, h1) = hc.split_at_mut(lh);
        for j in 0..lh {
            f(base + j, &mut l0[j], &mut l1[j], &mut h0[j], &mut h1[j]);
        }
    };
    let run_block = |base: usize, chunk: &mut [T]| {
        let (lo, hi) = chunk.split_at_mut(hh);
        for (m, (lc, hc)) in lo.chunks_mut(lb).zip(hi.chunks_mut(lb)).enumerate() {
            run_sub(base + m * lb, lc, hc);
        }
    };

    if amps.len() < PAR_THRESHOLD {
        for (k, chunk) in amps.chunks_mut(hb).enumerate() {
            run_block(k * hb, chunk);
        }
    } else if amps.len() / hb >= MIN_PAR_BLOCKS {
        amps.par_chunks_mut(hb)
            .enumerate()
            .for_each(|(k, chunk)| run_block(k * hb, chunk));
    } else {
        for (k, chunk) in amps.chunks_mut(hb).enumerate() {
            let base = k * hb;
            let (lo, hi) = chunk.split_at_mut(hh);
            lo.par_chunks_mut(lb)
                .zip(hi.par_chunks_mut(lb))
                .enumerate()
                .for_each(|(m, (lc, hc))| run_sub(base + m * lb, lc, hc));
        }
    }
}

/// Applies `gate` to `amps`; the gate's qubits are bit positions in the slice.
pub fn apply_gate(amps: &mut [Complex64], gate: &Gate) {
    let qs = gate.qubits();
    match gate.kind() {
        GateKind::Cnot | GateKind::Swap => apply_permutation(amps, gate),
        GateKind::Cz => {
            let (lo, hi) = (qs[0].min(qs[1]), qs[0].max(qs[1]));
            let lmask = 1usize << lo;
            for_each_pair(amps, hi, |i, _, a1| {
                if i & lmask != 0 {
                    *a1 = -*a1;
                }
            });
        }
        GateKind::I => {}
        _ => {
            let op = PairOp::of(gate);
            for_each_pair(amps, qs[0], |_, a0, a1| op.apply(a0, a1));
        }
    }
}

/// CNOT, SWAP and X only move cells, so they work on any cell type.
pub fn apply_permutation<T: Send>(cells: &mut [T], gate: &Gate) {
    let qs = gate.qubits();
    match gate.kind() {
        GateKind::X => for_each_pair(cells, qs[0], |_, a0, a1| std::mem::swap(a0, a1)),
        GateKind::Cnot => {
            let cmask = 1usize << qs[0];
            for_each_pair(cells, qs[1], |i, a0, a1| {
                if i & cmask != 0 {
                    std::mem::swap(a0, a1);
                }
            });
        }
        GateKind::Swap => {
            let (lo, hi) = (qs[0].min(qs[1]), qs[0].max(qs[1]));
            for_each_quad(cells, lo, hi, |_, _, a_l, a_h, _| std::mem::swap(a_l, a_h));
        }
        k => panic!("{k} is not a permutation gate"),
    }
}

/// Multiplies every amplitude by `factor`.
pub fn scale(amps: &mut [Complex64], factor: Complex64) {
    if amps.len() < PAR_THRESHOLD {
        amps.iter_mut().for_each(|a| *a *= factor);
    } else {
        amps.par_iter_mut()
            .with_min_len(MIN_PAR_LEN)
            .for_each(|a| *a *= factor);
    }
}

/// Chunk length used to reduce over bit `q`; a multiple of the pair block.
pub fn reduce_chunk_len(len: usize, q: usize) -> usize {
    REDUCE_CHUNK.max(2 << q).min(len)
}

/// `(sum |a0|^2 - |a1|^2, sum conj(a0) a1)` over the pairs of bit `q` in one chunk.
pub fn pauli_partial(chunk: &[Complex64], q: usize) -> (f64, Complex64) {
    let half = 1usize << q;
    let mut z = 0.0;
    let mut cross = Complex64::new(0.0, 0.0);
    for block in chunk.chunks(half << 1) {
        let (lo, hi) = block.split_at(half);
        for (a0, a1) in lo.iter().zip(hi) {
            z += a0.norm_sqr() - a1.norm_sqr();
            cross += a0.conj() * a1;
        }
    }
    (z, cross)
}

/// Deterministic `pauli_partial` over the whole slice: fixed chunks, partial
/// sums combined left to right.
pub fn pauli_sums(amps: &[Complex64], q: usize) -> (f64, Complex64) {
    let chunk = reduce_chunk_len(amps.len(), q);
    let partials: Vec<(f64, Complex64)> = if amps.len() < PAR_THRESHOLD {
        amps.chunks(chunk).map(|c| pauli_partial(c, q)).collect()
    } else {
        amps.par_chunks(chunk)
            .map(|c| pauli_partial(c, q))
            .collect()
    };
    partials
        .into_iter()
        .fold((0.0, Complex64::new(0.0, 0.0)), |(z, x), (pz, px)| {
            (z + pz, x + px)
        })
}

/// Deterministic `sum |a_i|^2`.
pub fn norm_sqr(amps: &[Complex64]) -> f64 {
    let chunk = REDUCE_CHUNK.min(amps.len()).max(1);
    let part = |c: &[Complex64]| c.iter().map(|a| a.norm_sqr()).sum::<f64>();
    let partials: Vec<f64> = if amps.len() < PAR_THRESHOLD {
        amps.chunks(chunk).map(part).collect()
    } else {
        amps.par_chunks(chunk).map(part).collect()
    };
    partials.into_iter().sum()
}
