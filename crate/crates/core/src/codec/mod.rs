//! Two bytes per amplitude.
//!
//! Every amplitude is stored as a pair of one-byte codes, real part first,
//! that index one shared table of reals. Code 0 is exact zero; the other 255
//! slots are filled with new values as gates produce them, and while they fit
//! every value is stored exactly. A gate whose values do not fit saturates
//! the table: from then on each gate refits it to the values it produces (see
//! [`fit`]) and every part is rounded to the nearest entry.
//!
//! Each gate runs in two phases so the table never depends on scheduling: a
//! read-only scan collects the values (or their histogram) the gate will
//! produce, a serial step updates the table, then the codes are rewritten in
//! place. Permutation and sign gates (X, Y, Z, S, S†, CNOT, CZ, SWAP) only
//! move codes around, through a negation map when a sign changes.

pub mod dump;
pub mod fit;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::SimError;
use crate::statevector::kernels::{self, PairOp, PAR_THRESHOLD, REDUCE_CHUNK};
use crate::statevector::{q_values, Axis, ExpectationReport, StateVector, DEFAULT_MEMORY_BUDGET};

pub use dump::{read_encoded_dump, write_encoded_dump, EncodedDumpError, ENCODED_DUMP_MAGIC};

/// Table slots including the zero code.
pub const TABLE_SIZE: usize = 256;
/// Distinct values a scan chunk keeps before it is thinned out.
const CHUNK_CANDIDATES: usize = 1024;

/// One encoded amplitude: `[real code, imaginary code]`.
pub type Cell = [u8; 2];

/// Bytes of code storage for `n` qubits: `2^(n+1)`.
pub fn encoded_memory_bytes(n: usize) -> u128 {
    1u128 << (n + 1)
}

/// The shared value table. Unset slots hold NaN.
#[derive(Debug, Clone)]
pub struct Codebook {
    table: [f64; TABLE_SIZE],
    len: usize,
    by_bits: HashMap<u64, u8>,
    /// `(value, code)` ascending, zero included.
    sorted: Vec<(f64, u8)>,
    saturated: bool,
}

impl PartialEq for Codebook {
    fn eq(&self, other: &Self) -> bool {
        self.values()
            .iter()
            .map(|v| v.to_bits())
            .eq(other.values().iter().map(|v| v.to_bits()))
            && self.saturated == other.saturated
    }
}

impl Default for Codebook {
    fn default() -> Self {
        Codebook::new()
    }
}

impl Codebook {
    /// A table holding only the zero code.
    pub fn new() -> Self {
        let mut table = [f64::NAN; TABLE_SIZE];
        table[0] = 0.0;
        Codebook {
            table,
            len: 1,
            by_bits: HashMap::new(),
            sorted: vec![(0.0, 0)],
            saturated: false,
        }
    }

    /// Rebuilds a table from its set slots; `values[0]` must be zero and the
    /// rest distinct nonzero finite reals.
    pub fn from_values(values: &[f64], saturated: bool) -> Option<Self> {
        if values.is_empty() || values.len() > TABLE_SIZE || values[0] != 0.0 {
            return None;
        }
        let mut book = Codebook::new();
        for &v in &values[1..] {
            if !v.is_finite() || book.lookup(v).is_some() {
                return None;
            }
            book.insert(v);
        }
        book.saturated = saturated;
        Some(book)
    }

    /// Saturated table of zero, `levels` ascending, then their negations.
    /// Nonpositive and repeated levels are skipped.
    pub fn symmetric(levels: &[f64]) -> Self {
        let mut book = Codebook::new();
        let mut pos: Vec<f64> = levels
            .iter()
            .copied()
            .filter(|&v| v > 0.0 && v.is_finite())
            .collect();
        pos.sort_by(f64::total_cmp);
        pos.dedup();
        pos.truncate((TABLE_SIZE - 1) / 2);
        for &v in &pos {
            book.insert(v);
        }
        for &v in &pos {
            book.insert(-v);
        }
        book.saturated = true;
        book
    }

    /// Set slots, zero code included.
    pub fn values(&self) -> &[f64] {
        &self.table[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nonzero values inserted so far.
    pub fn insertion_count(&self) -> usize {
        self.len - 1
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    /// NaN for unset codes.
    #[inline]
    pub fn decode(&self, code: u8) -> f64 {
        self.table[code as usize]
    }

    #[inline]
    fn decode_cell(&self, c: Cell) -> Complex64 {
        Complex64::new(self.table[c[0] as usize], self.table[c[1] as usize])
    }

    /// Exact code of `v`, if present. Both zeros map to code 0.
    #[inline]
    pub fn lookup(&self, v: f64) -> Option<u8> {
        if v == 0.0 {
            Some(0)
        } else {
            self.by_bits.get(&v.to_bits()).copied()
        }
    }

    /// Code of the table value closest to `v`; ties go to the smaller value.
    pub fn nearest(&self, v: f64) -> u8 {
        let j = self.sorted.partition_point(|&(x, _)| x < v);
        match (j.checked_sub(1).map(|k| self.sorted[k]), self.sorted.get(j)) {
            (Some((lo, lc)), Some(&(hi, hc))) => {
                if v - lo <= hi - v {
                    lc
                } else {
                    hc
                }
            }
            (Some((_, lc)), None) => lc,
            (None, Some(&(_, hc))) => hc,
            (None, None) => 0,
        }
    }

    /// Half the gap between the table values that bracket `v` (zero when `v`
    /// is an entry), or `None` when `v` lies outside the table range.
    pub fn half_gap(&self, v: f64) -> Option<f64> {
        let j = self.sorted.partition_point(|&(x, _)| x < v);
        if self.sorted.get(j).is_some_and(|&(x, _)| x == v) {
            return Some(0.0);
        }
        if j == 0 || j == self.sorted.len() {
            return None;
        }
        Some((self.sorted[j].0 - self.sorted[j - 1].0) / 2.0)
    }

    /// Exact code if present, nearest otherwise.
    #[inline]
    pub fn encode(&self, v: f64) -> u8 {
        self.lookup(v).unwrap_or_else(|| self.nearest(v))
    }

    #[inline]
    fn encode_tracked(&self, v: f64, tally: &Tally) -> u8 {
        match self.lookup(v) {
            Some(c) => c,
            None => {
                let c = self.nearest(v);
                tally.record(v, self.table[c as usize], self.half_gap(v));
                c
            }
        }
    }

    fn insert(&mut self, v: f64) {
        let code = self.len as u8;
        self.table[self.len] = v;
        self.len += 1;
        self.by_bits.insert(v.to_bits(), code);
        let j = self.sorted.partition_point(|&(x, _)| x < v);
        self.sorted.insert(j, (v, code));
    }

    /// Inserts `cands` (sorted, deduplicated, nonzero) if they all fit and
    /// the list is complete; otherwise leaves the table unchanged and returns
    /// false.
    fn merge(&mut self, cands: Vec<f64>, thinned: bool) -> bool {
        if self.saturated || thinned {
            return false;
        }
        let fresh: Vec<f64> = cands
            .into_iter()
            .filter(|&v| self.lookup(v).is_none())
            .collect();
        if fresh.len() > TABLE_SIZE - self.len {
            return false;
        }
        for v in fresh {
            self.insert(v);
        }
        true
    }
}

/// Rounding counters accumulated over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CodecStats {
    /// Real parts stored inexactly.
    pub roundings: u64,
    pub max_rounding_error: f64,
    /// Largest `error / half_gap` over roundings inside the table range.
    pub max_gap_ratio: f64,
    /// Roundings of values outside the table range.
    pub clipped: u64,
}

#[derive(Default)]
struct Tally {
    roundings: AtomicU64,
    clipped: AtomicU64,
    max_err: AtomicU64,
    max_ratio: AtomicU64,
}

impl Tally {
    fn record(&self, v: f64, stored: f64, half_gap: Option<f64>) {
        let err = (v - stored).abs();
        self.roundings.fetch_add(1, Ordering::Relaxed);
        // non-negative floats order like their bit patterns
        self.max_err.fetch_max(err.to_bits(), Ordering::Relaxed);
        match half_gap {
            Some(h) if h > 0.0 => {
                self.max_ratio
                    .fetch_max((err / h).to_bits(), Ordering::Relaxed);
            }
            Some(_) => {}
            None => {
                self.clipped.fetch_add(1, Ordering::Relaxed);
            }
        }
    }

    fn fold_into(self, s: &mut CodecStats) {
        s.roundings += self.roundings.into_inner();
        s.clipped += self.clipped.into_inner();
        s.max_rounding_error = s
            .max_rounding_error
            .max(f64::from_bits(self.max_err.into_inner()));
        s.max_gap_ratio = s
            .max_gap_ratio
            .max(f64::from_bits(self.max_ratio.into_inner()));
    }
}

/// Sorted, deduplicated values of `parts` missing from `book`, thinned to
/// `CHUNK_CANDIDATES`; the flag reports thinning.
fn chunk_candidates(book: &Codebook, parts: impl Iterator<Item = f64>) -> (Vec<f64>, bool) {
    let mut v: Vec<f64> = parts.filter(|&x| book.lookup(x).is_none()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| a.to_bits() == b.to_bits());
    if v.len() <= CHUNK_CANDIDATES {
        return (v, false);
    }
    let step = v.len() as f64 / CHUNK_CANDIDATES as f64;
    let mut thin: Vec<f64> = (0..CHUNK_CANDIDATES)
        .map(|k| v[(k as f64 * step) as usize])
        .collect();
    thin.push(*v.last().expect("nonempty"));
    thin.dedup_by(|a, b| a.to_bits() == b.to_bits());
    (thin, true)
}

/// Runs `scan` over fixed index ranges of `0..total` and merges the results
/// into `book`; false if they do not fit.
fn collect_and_merge<F>(book: &mut Codebook, total: usize, scan: F) -> bool
where
    F: Fn(&Codebook, std::ops::Range<usize>) -> (Vec<f64>, bool) + Sync,
{
    if book.is_saturated() {
        return false;
    }
    let chunks = total.div_ceil(REDUCE_CHUNK);
    let shared: &Codebook = book;
    let run = |k: usize| {
        scan(
            shared,
            k * REDUCE_CHUNK..((k + 1) * REDUCE_CHUNK).min(total),
        )
    };
    let parts: Vec<(Vec<f64>, bool)> = if total < PAR_THRESHOLD {
        (0..chunks).map(run).collect()
    } else {
        (0..chunks).into_par_iter().map(run).collect()
    };
    let thinned = parts.iter().any(|p| p.1);
    let mut all: Vec<f64> = parts.into_iter().flat_map(|p| p.0).collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| a.to_bits() == b.to_bits());
    book.merge(all, thinned)
}

/// Index of the `p`-th pair of bit `q` (bit `q` cleared).
#[inline]
fn pair_index(p: usize, q: usize) -> usize {
    ((p >> q) << (q + 1)) | (p & ((1usize << q) - 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedState {
    n_qubits: usize,
    codes: Vec<Cell>,
    book: Codebook,
    stats: CodecStats,
}

impl EncodedState {
    /// `|0...0>` on `n` qubits within the default budget.
    pub fn new(n: usize) -> Result<Self, SimError> {
        EncodedState::with_budget(n, DEFAULT_MEMORY_BUDGET)
    }

    pub fn with_budget(n: usize, budget: u128) -> Result<Self, SimError> {
        let required = if n + 1 < 128 {
            encoded_memory_bytes(n)
        } else {
            u128::MAX
        };
        if required > budget || n >= usize::BITS as usize {
            return Err(SimError::MemoryBudget {
                n_qubits: n,
                required,
                budget,
            });
        }
        let mut book = Codebook::new();
        book.insert(1.0);
        let mut codes = vec![[0u8; 2]; 1usize << n];
        codes[0] = [1, 0];
        Ok(EncodedState {
            n_qubits: n,
            codes,
            book,
            stats: CodecStats::default(),
        })
    }

    /// Assembles a state from raw parts. Codes are not checked against the
    /// table; [`EncodedState::decode_state`] reports unset codes.
    pub fn from_parts(n: usize, codes: Vec<Cell>, book: Codebook) -> Result<Self, SimError> {
        let expected = 1usize.checked_shl(n as u32).ok_or(SimError::SizeMismatch {
            expected: usize::MAX,
            got: codes.len(),
        })?;
        if codes.len() != expected {
            return Err(SimError::SizeMismatch {
                expected,
                got: codes.len(),
            });
        }
        Ok(EncodedState {
            n_qubits: n,
            codes,
            book,
            stats: CodecStats::default(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn codes(&self) -> &[Cell] {
        &self.codes
    }

    pub fn codebook(&self) -> &Codebook {
        &self.book
    }

    pub fn stats(&self) -> CodecStats {
        self.stats
    }

    /// Bytes of code storage actually allocated.
    pub fn allocated_bytes(&self) -> usize {
        self.codes.capacity() * std::mem::size_of::<Cell>()
    }

    /// Exact table lookup of every cell.
    pub fn decode_state(&self) -> Result<StateVector, SimError> {
        let book = &self.book;
        let decode = |(i, c): (usize, &Cell)| -> Result<Complex64, SimError> {
            for code in *c {
                if code as usize >= book.len() {
                    return Err(SimError::UnsetCode { index: i, code });
                }
            }
            Ok(book.decode_cell(*c))
        };
        let amps: Result<Vec<Complex64>, SimError> = if self.codes.len() < PAR_THRESHOLD {
            self.codes.iter().enumerate().map(decode).collect()
        } else {
            self.codes.par_iter().enumerate().map(decode).collect()
        };
        let amps = match amps {
            Ok(a) => a,
            // report the lowest bad index regardless of scheduling
            Err(_) => {
                return Err(self
                    .codes
                    .iter()
                    .enumerate()
                    .map(decode)
                    .find_map(Result::err)
                    .expect("an error exists"))
            }
        };
        StateVector::from_amplitudes(self.n_qubits, amps)
    }

    pub fn amplitude(&self, z: &BitString) -> Result<Complex64, SimError> {
        if z.width() != self.n_qubits {
            return Err(SimError::SizeMismatch {
                expected: self.n_qubits,
                got: z.width(),
            });
        }
        Ok(self.book.decode_cell(self.codes[z.index()]))
    }

    /// `max_i |decode(self)_i - reference_i|`.
    pub fn max_abs_error(&self, reference: &StateVector) -> Result<f64, SimError> {
        if reference.n_qubits() != self.n_qubits {
            return Err(SimError::SizeMismatch {
                expected: self.n_qubits,
                got: reference.n_qubits(),
            });
        }
        let book = &self.book;
        let err = |(c, r): (&Cell, &Complex64)| (book.decode_cell(*c) - r).norm();
        let pairs = self.codes.par_iter().zip(reference.amplitudes().par_iter());
        Ok(pairs.map(err).reduce(|| 0.0, f64::max))
    }

    fn check_qubits(&self, gate: &Gate) -> Result<(), SimError> {
        match gate.qubits().iter().find(|&&q| q >= self.n_qubits) {
            Some(&q) => Err(SimError::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            }),
            None => Ok(()),
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), SimError> {
        self.check_qubits(gate)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<(), SimError> {
        if c.n_qubits() != self.n_qubits {
            return Err(SimError::SizeMismatch {
                expected: self.n_qubits,
                got: c.n_qubits(),
            });
        }
        for g in c.gates() {
            self.apply_unchecked(g);
        }
        Ok(())
    }

    fn apply_unchecked(&mut self, gate: &Gate) {
        let qs = gate.qubits();
        match gate.kind() {
            GateKind::I => {}
            GateKind::X | GateKind::Cnot | GateKind::Swap => {
                kernels::apply_permutation(&mut self.codes, gate)
            }
            GateKind::Z => {
                let bit = 1usize << qs[0];
                let neg = self.negation_map(|i| {
                    if i & bit != 0 {
                        (true, true)
                    } else {
                        (false, false)
                    }
                });
                kernels::for_each_pair(&mut self.codes, qs[0], |_, _, b| {
                    *b = [neg[b[0] as usize], neg[b[1] as usize]]
                });
            }
            GateKind::Cz => {
                let mask = (1usize << qs[0]) | (1usize << qs[1]);
                let neg = self.negation_map(|i| {
                    if i & mask == mask {
                        (true, true)
                    } else {
                        (false, false)
                    }
                });
                let (lo, hi) = (qs[0].min(qs[1]), qs[0].max(qs[1]));
                let lmask = 1usize << lo;
                kernels::for_each_pair(&mut self.codes, hi, |i, _, b| {
                    if i & lmask != 0 {
                        *b = [neg[b[0] as usize], neg[b[1] as usize]];
                    }
                });
            }
            GateKind::S => {
                // i (x + iy) = -y + ix
                let bit = 1usize << qs[0];
                let neg = self.negation_map(|i| (false, i & bit != 0));
                kernels::for_each_pair(&mut self.codes, qs[0], |_, _, b| {
                    *b = [neg[b[1] as usize], b[0]]
                });
            }
            GateKind::Sdg => {
                // -i (x + iy) = y - ix
                let bit = 1usize << qs[0];
                let neg = self.negation_map(|i| (i & bit != 0, false));
                kernels::for_each_pair(&mut self.codes, qs[0], |_, _, b| {
                    *b = [b[1], neg[b[0] as usize]]
                });
            }
            GateKind::Y => {
                // a0' = -i a1, a1' = i a0
                let bit = 1usize << qs[0];
                let neg = self.negation_map(|i| {
                    if i & bit != 0 {
                        (true, false)
                    } else {
                        (false, true)
                    }
                });
                kernels::for_each_pair(&mut self.codes, qs[0], |_, a, b| {
                    let (x, y) = (*a, *b);
                    *a = [y[1], neg[y[0] as usize]];
                    *b = [neg[x[1] as usize], x[0]];
                });
            }
            _ => self.apply_pair_op(qs[0], PairOp::of(gate)),
        }
    }

    /// Map from code to the code of its negation, after inserting the
    /// negations of every code in the parts selected by `which(index)`.
    fn negation_map<W>(&mut self, which: W) -> [u8; TABLE_SIZE]
    where
        W: Fn(usize) -> (bool, bool) + Sync,
    {
        let codes = &self.codes;
        let scan = |range: std::ops::Range<usize>| -> [u64; 4] {
            let mut seen = [0u64; 4];
            for i in range {
                let (re, im) = which(i);
                for (flag, code) in [(re, codes[i][0]), (im, codes[i][1])] {
                    if flag {
                        seen[code as usize >> 6] |= 1 << (code & 63);
                    }
                }
            }
            seen
        };
        let total = codes.len();
        let chunks = total.div_ceil(REDUCE_CHUNK);
        let range = |k: usize| k * REDUCE_CHUNK..((k + 1) * REDUCE_CHUNK).min(total);
        let or = |a: [u64; 4], b: [u64; 4]| [a[0] | b[0], a[1] | b[1], a[2] | b[2], a[3] | b[3]];
        let seen = if total < PAR_THRESHOLD {
            (0..chunks).map(|k| scan(range(k))).fold([0; 4], or)
        } else {
            (0..chunks)
                .into_par_iter()
                .map(|k| scan(range(k)))
                .reduce(|| [0; 4], or)
        };
        let used: Vec<u8> = (1..self.book.len())
            .map(|c| c as u8)
            .filter(|&c| seen[c as usize >> 6] & (1 << (c & 63)) != 0)
            .collect();
        if !self.book.is_saturated() {
            let mut cands: Vec<f64> = used
                .iter()
                .map(|&c| -self.book.decode(c))
                .filter(|&v| self.book.lookup(v).is_none())
                .collect();
            cands.sort_by(f64::total_cmp);
            if !self.book.merge(cands, false) {
                self.refit();
            }
        }
        // fitted tables are symmetric, so every lookup here is exact
        let mut neg = [0u8; TABLE_SIZE];
        for (c, slot) in neg.iter_mut().enumerate().take(self.book.len()) {
            *slot = self.book.encode(-self.book.decode(c as u8));
        }
        neg
    }

    /// Switches to a table fitted to the current parts and re-encodes.
    fn refit(&mut self) {
        let codes = &self.codes;
        let old = &self.book;
        let new = fit::fit_codebook(codes.len(), |i| {
            let a = old.decode_cell(codes[i]);
            [a.re, a.im]
        });
        let tally = Tally::default();
        let recode = |c: &mut Cell| {
            let a = old.decode_cell(*c);
            *c = [
                new.encode_tracked(a.re, &tally),
                new.encode_tracked(a.im, &tally),
            ];
        };
        if self.codes.len() < PAR_THRESHOLD {
            self.codes.iter_mut().for_each(recode);
        } else {
            self.codes
                .par_iter_mut()
                .with_min_len(REDUCE_CHUNK)
                .for_each(recode);
        }
        tally.fold_into(&mut self.stats);
        self.book = new;
    }

    fn apply_pair_op(&mut self, q: usize, op: PairOp) {
        if op == PairOp::Identity {
            return;
        }
        let codes = &self.codes;
        let old = &self.book;
        let outputs = |p: usize| {
            let i = pair_index(p, q);
            let (mut x, mut y) = (
                old.decode_cell(codes[i]),
                old.decode_cell(codes[i | (1 << q)]),
            );
            op.apply(&mut x, &mut y);
            [x.re, x.im, y.re, y.im]
        };
        let pairs = codes.len() / 2;
        let mut grown = old.clone();
        let fitted = if collect_and_merge(&mut grown, pairs, |book, range| {
            chunk_candidates(book, range.flat_map(outputs))
        }) {
            grown
        } else {
            fit::fit_codebook(pairs, outputs)
        };
        let new = &fitted;
        let tally = Tally::default();
        kernels::for_each_pair(&mut self.codes, q, |_, a, b| {
            let (mut x, mut y) = (old.decode_cell(*a), old.decode_cell(*b));
            op.apply(&mut x, &mut y);
            *a = [
                new.encode_tracked(x.re, &tally),
                new.encode_tracked(x.im, &tally),
            ];
            *b = [
                new.encode_tracked(y.re, &tally),
                new.encode_tracked(y.im, &tally),
            ];
        });
        tally.fold_into(&mut self.stats);
        self.book = fitted;
    }

    fn pauli_sums(&self, q: usize) -> (f64, Complex64) {
        let chunk = kernels::reduce_chunk_len(self.codes.len(), q);
        let book = &self.book;
        let part = |c: &[Cell]| {
            let decoded: Vec<Complex64> = c.iter().map(|&x| book.decode_cell(x)).collect();
            kernels::pauli_partial(&decoded, q)
        };
        let partials: Vec<(f64, Complex64)> = if self.codes.len() < PAR_THRESHOLD {
            self.codes.chunks(chunk).map(part).collect()
        } else {
            self.codes.par_chunks(chunk).map(part).collect()
        };
        partials
            .into_iter()
            .fold((0.0, Complex64::new(0.0, 0.0)), |(z, x), (pz, px)| {
                (z + pz, x + px)
            })
    }

    /// Same reduction order as [`StateVector::expectation`], so a lossless
    /// encoding gives bitwise equal results.
    pub fn expectation(&self, axis: Axis, qubit: usize) -> Result<f64, SimError> {
        if qubit >= self.n_qubits {
            return Err(SimError::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        let (z, cross) = self.pauli_sums(qubit);
        Ok(q_values(z, cross)[axis as usize])
    }

    pub fn expectation_report(&self) -> ExpectationReport {
        let per_qubit = (0..self.n_qubits)
            .map(|q| {
                let (z, cross) = self.pauli_sums(q);
                q_values(z, cross)
            })
            .collect();
        ExpectationReport { per_qubit }
    }
}

/// Encodes `s`, filling a fresh table with its distinct parts.
pub fn encode_state(s: &StateVector) -> EncodedState {
    let amps = s.amplitudes();
    let mut book = Codebook::new();
    if !collect_and_merge(&mut book, amps.len(), |book, range| {
        chunk_candidates(book, amps[range].iter().flat_map(|a| [a.re, a.im]))
    }) {
        book = fit::fit_codebook(amps.len(), |i| [amps[i].re, amps[i].im]);
    }
    let tally = Tally::default();
    let encode = |a: &Complex64| {
        [
            book.encode_tracked(a.re, &tally),
            book.encode_tracked(a.im, &tally),
        ]
    };
    let codes: Vec<Cell> = if amps.len() < PAR_THRESHOLD {
        amps.iter().map(encode).collect()
    } else {
        amps.par_iter().map(encode).collect()
    };
    let mut stats = CodecStats::default();
    tally.fold_into(&mut stats);
    EncodedState {
        n_qubits: s.n_qubits(),
        codes,
        book,
        stats,
    }
}

pub fn decode_state(e: &EncodedState) -> Result<StateVector, SimError> {
    e.decode_state()
}

/// `|0...0>` followed by every gate of `c`, in the encoded representation.
pub fn run_circuit_encoded(c: &Circuit) -> Result<EncodedState, SimError> {
    run_circuit_encoded_with_budget(c, DEFAULT_MEMORY_BUDGET)
}

pub fn run_circuit_encoded_with_budget(
    c: &Circuit,
    budget: u128,
) -> Result<EncodedState, SimError> {
    let mut e = EncodedState::with_budget(c.n_qubits(), budget)?;
    e.apply_circuit(c)?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{
        gen_ghz_chain, gen_random_circuit, gen_uniform_superposition, random_gate_sequence,
    };
    use crate::statevector::run_circuit;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bitwise_eq(a: &StateVector, b: &StateVector) -> bool {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .all(|(x, y)| x == y)
    }

    #[test]
    fn code_storage_is_two_bytes_per_amplitude() {
        for n in [1, 5, 12] {
            let e = EncodedState::new(n).unwrap();
            assert_eq!(e.allocated_bytes() as u128, encoded_memory_bytes(n));
            assert_eq!(encoded_memory_bytes(n) * 8, crate::memory_bytes(n));
        }
        assert!(matches!(
            EncodedState::with_budget(10, 1 << 10),
            Err(SimError::MemoryBudget { required: 2048, .. })
        ));
    }

    #[test]
    fn uniform_and_ghz_round_trip_with_two_entries() {
        for s in [
            run_circuit(&gen_uniform_superposition(6).unwrap()).unwrap(),
            run_circuit(&gen_ghz_chain(6).unwrap()).unwrap(),
        ] {
            let e = encode_state(&s);
            assert_eq!(e.codebook().len(), 2);
            assert!(!e.codebook().is_saturated());
            assert!(bitwise_eq(&e.decode_state().unwrap(), &s));
        }
        let ghz = encode_state(&run_circuit(&gen_ghz_chain(3).unwrap()).unwrap());
        assert_eq!(ghz.codebook().values(), &[0.0, FRAC_1_SQRT_2]);
    }

    #[test]
    fn zero_state_decodes_exactly() {
        let e = encode_state(&StateVector::new(1).unwrap());
        let d = e.decode_state().unwrap();
        assert_eq!(
            d.amplitudes(),
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        );
    }

    #[test]
    fn three_hundred_values_saturate_with_bounded_error() {
        let n = 9;
        let values: Vec<f64> = (0..300).map(|k| 0.001 + 0.0001 * k as f64).collect();
        let amps: Vec<Complex64> = (0..1usize << n)
            .map(|i| {
                if i < 300 {
                    Complex64::new(values[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let s = StateVector::from_amplitudes(n, amps).unwrap();
        let e = encode_state(&s);
        assert!(e.codebook().is_saturated());
        let err = e.max_abs_error(&s).unwrap();
        // 127 magnitudes over 300 evenly spaced values: at most three per gap
        assert!(err > 0.0 && err <= 0.0003, "{err}");
        assert!(e.stats().max_gap_ratio <= 1.0 + 1e-12);
        assert_eq!(e.stats().clipped, 0);
    }

    #[test]
    fn unset_code_is_reported() {
        let mut book = Codebook::new();
        book.insert(1.0);
        let e = EncodedState::from_parts(1, vec![[1, 0], [0, 7]], book).unwrap();
        assert_eq!(
            e.decode_state(),
            Err(SimError::UnsetCode { index: 1, code: 7 })
        );
        assert!(EncodedState::from_parts(2, vec![[0, 0]], Codebook::new()).is_err());
    }

    #[test]
    fn cnot_moves_codes_without_new_entries() {
        let mut e = EncodedState::new(2).unwrap();
        e.apply_gate(&Gate::h(0)).unwrap();
        let before = e.codebook().clone();
        let mut moved = e.codes().to_vec();
        moved.swap(1, 3);
        e.apply_gate(&Gate::cnot(0, 1)).unwrap();
        assert_eq!(e.codes(), moved.as_slice());
        assert_eq!(e.codebook(), &before);
    }

    #[test]
    fn hadamard_inserts_inverse_sqrt_two() {
        let mut e = EncodedState::new(1).unwrap();
        e.apply_gate(&Gate::h(0)).unwrap();
        assert!(e.codebook().lookup(FRAC_1_SQRT_2).is_some());
        let exact = run_circuit(&Circuit::from_gates(1, vec![Gate::h(0)], "h").unwrap()).unwrap();
        assert!(bitwise_eq(&e.decode_state().unwrap(), &exact));
    }

    #[test]
    fn ghz_ten_matches_exact_engine() {
        let c = gen_ghz_chain(10).unwrap();
        let e = run_circuit_encoded(&c).unwrap();
        assert!(!e.codebook().is_saturated());
        assert!(e.max_abs_error(&run_circuit(&c).unwrap()).unwrap() <= 1e-12);
    }

    #[test]
    fn code_move_gates_match_exact_kernels() {
        let kinds = [
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::S,
            GateKind::Sdg,
            GateKind::I,
        ];
        let mut gates = vec![
            Gate::h(0),
            Gate::t(0),
            Gate::h(1),
            Gate::rx(2, 0.3),
            Gate::cnot(0, 2),
        ];
        for (k, kind) in kinds.iter().enumerate() {
            gates.push(Gate::new(*kind, &[k % 3], &[]).unwrap());
            gates.push(Gate::cz(k % 3, (k + 1) % 3));
            gates.push(Gate::swap(k % 3, (k + 2) % 3));
        }
        let c = Circuit::from_gates(3, gates, "moves").unwrap();
        let e = run_circuit_encoded(&c).unwrap();
        assert!(!e.codebook().is_saturated());
        assert_eq!(e.max_abs_error(&run_circuit(&c).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn unsaturated_expectations_are_bitwise_equal() {
        let c = random_gate_sequence(4, 12, 3);
        let e = run_circuit_encoded(&c).unwrap();
        let s = run_circuit(&c).unwrap();
        if !e.codebook().is_saturated() {
            assert_eq!(e.expectation_report(), s.expectation_report());
        }
    }

    #[test]
    fn random_ten_qubit_circuit_error_is_small() {
        for depth in [15, 20] {
            let c = gen_random_circuit(2, 5, depth, 17).unwrap();
            let e = run_circuit_encoded(&c).unwrap();
            assert!(e.codebook().is_saturated());
            let err = e.max_abs_error(&run_circuit(&c).unwrap()).unwrap();
            assert!(err <= 5e-3, "depth {depth}: {err}");
            assert!(e.stats().max_gap_ratio <= 1.0 + 1e-9);
            assert_eq!(e.stats().clipped, 0);
        }
    }

    #[test]
    fn saturated_runs_do_not_depend_on_worker_count() {
        let c = gen_random_circuit(3, 5, 12, 4).unwrap();
        let a = run_circuit_encoded(&c).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b = pool.install(|| run_circuit_encoded(&c).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_size_reference_is_rejected() {
        let e = EncodedState::new(3).unwrap();
        assert!(e.max_abs_error(&StateVector::new(2).unwrap()).is_err());
    }

    #[test]
    fn codebook_lookup_and_nearest() {
        let book = Codebook::from_values(&[0.0, 0.5, -0.25, 1.0], false).unwrap();
        assert_eq!(book.lookup(-0.0), Some(0));
        assert_eq!(book.lookup(0.5), Some(1));
        assert_eq!(book.nearest(0.7), 1);
        assert_eq!(book.nearest(0.8), 3);
        assert_eq!(book.nearest(-9.0), 2);
        assert_eq!(book.half_gap(0.7), Some(0.25));
        assert_eq!(book.half_gap(2.0), None);
        assert!(Codebook::from_values(&[0.0, 0.5, 0.5], false).is_none());
        assert!(Codebook::from_values(&[1.0], false).is_none());
    }
}
