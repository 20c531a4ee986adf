//! Exact state vector split over `R = 2^r` ranks.
//!
//! Physical bit positions `0..L` (`L = N - r`) index amplitudes inside a
//! rank's block; positions `L..N` are global and select the rank. A layout
//! maps every logical qubit to a position and is changed only by remaps
//! (swapping a global position with a local one) and by SWAP gates, which are
//! pure relabelings.
//!
//! Ranks run as in-process workers and exchange amplitudes only through a
//! [`Transport`]. A gate whose qubits are all local, or that is diagonal in
//! its global qubits, runs without communication. Otherwise one qubit must be
//! brought in: either permanently by a remap (each rank sends half its block)
//! or for this gate only by a pair exchange (partners swap whole blocks and
//! each computes its own new block). The planner picks by projected bytes
//! over the current and next gate.

pub mod transport;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::SimError;
use crate::statevector::kernels::{self, PairOp};
use crate::statevector::{memory_bytes, ExpectationReport, StateVector, DEFAULT_MEMORY_BUDGET};

pub use transport::{ChannelTransport, Transport, TransportError};

const AMP_BYTES: u64 = std::mem::size_of::<Complex64>() as u64;

#[derive(Debug, Error)]
pub enum DistributedError {
    #[error("rank count {0} is not a power of two")]
    RanksNotPowerOfTwo(usize),
    #[error("{ranks} ranks need at least log2({ranks}) qubits, got {n_qubits}")]
    TooManyRanks { ranks: usize, n_qubits: usize },
    #[error("threads per rank must be at least 1")]
    ZeroThreads,
    #[error("position {pos} out of range for {n_qubits} qubit(s)")]
    Position { pos: usize, n_qubits: usize },
    #[error("cannot swap position {0} with itself")]
    SamePosition(usize),
    #[error("positions {a} and {b} are not one local and one global")]
    NotLocalGlobal { a: usize, b: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommKind {
    Local,
    PairExchange,
    Remap,
}

/// How one gate is executed and what it costs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommPlan {
    pub kind: CommKind,
    /// Rank-index masks of the communication partners (`rank ^ mask`).
    pub partner_offsets: Vec<usize>,
    /// Bytes each rank sends.
    pub bytes_per_rank: u64,
    /// `(local position, global position)` swaps a remap performs first.
    pub swaps: Vec<(usize, usize)>,
}

impl CommPlan {
    fn local() -> Self {
        CommPlan {
            kind: CommKind::Local,
            partner_offsets: Vec::new(),
            bytes_per_rank: 0,
            swaps: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommPolicy {
    /// Cheaper of remap and pair exchange over a one-gate lookahead.
    #[default]
    Greedy,
    AlwaysRemap,
    AlwaysExchange,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributedConfig {
    pub ranks: usize,
    pub threads_per_rank: usize,
    /// Bytes of amplitude storage allowed per rank.
    pub budget_per_rank: u128,
    pub policy: CommPolicy,
}

impl DistributedConfig {
    pub fn new(ranks: usize) -> Self {
        DistributedConfig {
            ranks,
            threads_per_rank: 1,
            budget_per_rank: DEFAULT_MEMORY_BUDGET,
            policy: CommPolicy::Greedy,
        }
    }
}

/// Communication counters, summed over ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommStats {
    pub bytes_sent: u64,
    pub messages: u64,
    pub remaps: u64,
    pub pair_exchanges: u64,
    pub local_gates: u64,
}

pub struct DistributedState {
    n_qubits: usize,
    local: usize,
    blocks: Vec<Vec<Complex64>>,
    /// logical qubit -> position
    pos_of: Vec<usize>,
    /// position -> logical qubit
    qubit_at: Vec<usize>,
    transport: Box<dyn Transport + Send>,
    pools: Vec<rayon::ThreadPool>,
    policy: CommPolicy,
    stats: CommStats,
}

impl std::fmt::Debug for DistributedState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DistributedState")
            .field("n_qubits", &self.n_qubits)
            .field("ranks", &self.blocks.len())
            .field("qubit_at", &self.qubit_at)
            .field("stats", &self.stats)
            .finish_non_exhaustive()
    }
}

/// `|0...0>` on `n` qubits over `ranks` ranks with default settings.
pub fn partition_state(n: usize, ranks: usize) -> Result<DistributedState, DistributedError> {
    DistributedState::new(n, DistributedConfig::new(ranks))
}

impl DistributedState {
    pub fn new(n: usize, config: DistributedConfig) -> Result<Self, DistributedError> {
        let transport = ChannelTransport::new(config.ranks);
        DistributedState::with_transport(n, config, Box::new(transport))
    }

    pub fn with_transport(
        n: usize,
        config: DistributedConfig,
        transport: Box<dyn Transport + Send>,
    ) -> Result<Self, DistributedError> {
        let ranks = config.ranks;
        if ranks == 0 || !ranks.is_power_of_two() {
            return Err(DistributedError::RanksNotPowerOfTwo(ranks));
        }
        let r = ranks.trailing_zeros() as usize;
        if r > n {
            return Err(DistributedError::TooManyRanks { ranks, n_qubits: n });
        }
        if config.threads_per_rank == 0 {
            return Err(DistributedError::ZeroThreads);
        }
        let local = n - r;
        let required = memory_bytes(local);
        if required > config.budget_per_rank || local >= usize::BITS as usize {
            return Err(SimError::MemoryBudget {
                n_qubits: n,
                required,
                budget: config.budget_per_rank,
            }
            .into());
        }
        if transport.n_ranks() != ranks {
            return Err(DistributedError::Transport(TransportError::Send {
                from: 0,
                to: ranks,
                reason: format!("transport has {} ranks", transport.n_ranks()),
            }));
        }
        let pools = (0..ranks)
            .map(|rank| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(config.threads_per_rank)
                    .thread_name(move |i| format!("rank{rank}-{i}"))
                    .build()
                    .map_err(|e| DistributedError::ThreadPool(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut blocks = vec![vec![Complex64::new(0.0, 0.0); 1usize << local]; ranks];
        blocks[0][0] = Complex64::new(1.0, 0.0);
        Ok(DistributedState {
            n_qubits: n,
            local,
            blocks,
            pos_of: (0..n).collect(),
            qubit_at: (0..n).collect(),
            transport,
            pools,
            policy: config.policy,
            stats: CommStats::default(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_ranks(&self) -> usize {
        self.blocks.len()
    }

    /// Number of local positions, `N - r`.
    pub fn local_qubits(&self) -> usize {
        self.local
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }

    /// Logical qubit held at each position.
    pub fn perm(&self) -> &[usize] {
        &self.qubit_at
    }

    /// Position of each logical qubit.
    pub fn positions(&self) -> &[usize] {
        &self.pos_of
    }

    pub fn stats(&self) -> CommStats {
        self.stats
    }

    pub fn policy(&self) -> CommPolicy {
        self.policy
    }

    pub fn set_policy(&mut self, policy: CommPolicy) {
        self.policy = policy;
    }

    fn is_global(&self, pos: usize) -> bool {
        pos >= self.local
    }

    fn half_block_bytes(&self) -> u64 {
        if self.local == 0 {
            0
        } else {
            (1u64 << (self.local - 1)) * AMP_BYTES
        }
    }

    /// The logical qubit `gate` needs at a local position under `pos_of`, if
    /// any. Diagonal gates, SWAP and the control of a CNOT never do.
    fn needs_local(&self, gate: &Gate, pos_of: &[usize]) -> Option<usize> {
        let qs = gate.qubits();
        let target = match gate.kind() {
            GateKind::Swap | GateKind::Cz => return None,
            GateKind::Cnot => qs[1],
            _ if gate.is_diagonal() => return None,
            _ => qs[0],
        };
        (pos_of[target] >= self.local).then_some(target)
    }

    /// Plans `gate`; `next` is the following gate, if known.
    pub fn plan_gate(&self, gate: &Gate, next: Option<&Gate>) -> CommPlan {
        let Some(q) = self.needs_local(gate, &self.pos_of) else {
            return CommPlan::local();
        };
        let g = self.pos_of[q];
        let mask = 1usize << (g - self.local);
        let half = self.half_block_bytes();
        let exchange = CommPlan {
            kind: CommKind::PairExchange,
            partner_offsets: vec![mask],
            bytes_per_rank: (1u64 << self.local) * AMP_BYTES,
            swaps: Vec::new(),
        };
        if self.local == 0 {
            return exchange;
        }
        // bytes the next gate will need under a layout
        let follow_up = |pos_of: &[usize]| match next {
            Some(n) if self.needs_local(n, pos_of).is_some() => half,
            _ => 0,
        };
        let after_evicting = |p: usize| {
            let mut after = self.pos_of.clone();
            after.swap(q, self.qubit_at[p]);
            after
        };
        let in_gate = |p: usize, gate: &Gate| gate.touches(self.qubit_at[p]);
        let evict = (0..self.local)
            .filter(|&p| !in_gate(p, gate))
            .min_by_key(|&p| {
                (
                    follow_up(&after_evicting(p)),
                    next.is_some_and(|n| in_gate(p, n)),
                    p,
                )
            })
            .unwrap_or(0);
        let remap = CommPlan {
            kind: CommKind::Remap,
            partner_offsets: vec![mask],
            bytes_per_rank: half,
            swaps: vec![(evict, g)],
        };
        match self.policy {
            CommPolicy::AlwaysRemap => remap,
            CommPolicy::AlwaysExchange => exchange,
            CommPolicy::Greedy => {
                let remap_cost = remap.bytes_per_rank + follow_up(&after_evicting(evict));
                let exchange_cost = exchange.bytes_per_rank + follow_up(&self.pos_of);
                if remap_cost < exchange_cost {
                    remap
                } else {
                    exchange
                }
            }
        }
    }

    /// Plans and runs `gate` without lookahead.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<CommPlan, DistributedError> {
        self.check_qubits(gate)?;
        let plan = self.plan_gate(gate, None);
        self.execute(gate, &plan)?;
        Ok(plan)
    }

    /// Runs every gate of `c`, planning each with the next one in view.
    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<(), DistributedError> {
        if c.n_qubits() != self.n_qubits {
            return Err(SimError::SizeMismatch {
                expected: self.n_qubits,
                got: c.n_qubits(),
            }
            .into());
        }
        let gates = c.gates();
        for (k, gate) in gates.iter().enumerate() {
            let plan = self.plan_gate(gate, gates.get(k + 1));
            self.execute(gate, &plan)?;
        }
        Ok(())
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

    fn execute(&mut self, gate: &Gate, plan: &CommPlan) -> Result<(), DistributedError> {
        match plan.kind {
            CommKind::Local => {
                self.stats.local_gates += 1;
                self.run_local(gate)
            }
            CommKind::Remap => {
                for &(l, g) in &plan.swaps {
                    self.swap_positions(l, g)?;
                    self.stats.remaps += 1;
                }
                self.run_local(gate)
            }
            CommKind::PairExchange => {
                self.stats.pair_exchanges += 1;
                self.run_exchange(gate)
            }
        }
    }

    /// Runs `f` once per rank, each on its own worker inside its pool.
    fn on_ranks<F>(&mut self, f: F) -> Result<(), DistributedError>
    where
        F: Fn(usize, &mut Vec<Complex64>, &dyn Transport) -> Result<(), TransportError> + Sync,
    {
        let transport: &dyn Transport = &*self.transport;
        let pools = &self.pools;
        let results: Vec<Result<(), TransportError>> = if self.blocks.len() == 1 {
            vec![pools[0].install(|| f(0, &mut self.blocks[0], transport))]
        } else {
            std::thread::scope(|s| {
                let f = &f;
                let handles: Vec<_> = self
                    .blocks
                    .iter_mut()
                    .enumerate()
                    .map(|(rank, block)| {
                        s.spawn(move || pools[rank].install(|| f(rank, block, transport)))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
                    .collect()
            })
        };
        results
            .into_iter()
            .try_for_each(|r| r.map_err(DistributedError::from))
    }

    fn run_local(&mut self, gate: &Gate) -> Result<(), DistributedError> {
        if gate.kind() == GateKind::Swap {
            let (a, b) = (gate.qubits()[0], gate.qubits()[1]);
            let (pa, pb) = (self.pos_of[a], self.pos_of[b]);
            self.pos_of.swap(a, b);
            self.qubit_at.swap(pa, pb);
            return Ok(());
        }
        let physical = gate.remapped(|q| self.pos_of[q]);
        let local = self.local;
        self.on_ranks(|rank, block, _| {
            apply_on_rank(rank, block, &physical, local);
            Ok(())
        })
    }

    /// Partners swap whole blocks; each rank then computes its own new block.
    fn run_exchange(&mut self, gate: &Gate) -> Result<(), DistributedError> {
        let physical = gate.remapped(|q| self.pos_of[q]);
        let local = self.local;
        let block_len = 1u64 << local;
        let qs = physical.qubits().to_vec();
        let (target, control) = match physical.kind() {
            GateKind::Cnot => (qs[1], Some(qs[0])),
            _ => (qs[0], None),
        };
        let k = target - local;
        let op = (control.is_none()).then(|| PairOp::of(&physical));
        self.on_ranks(|rank, block, t| {
            let partner = rank ^ (1 << k);
            t.send(rank, partner, block.clone())?;
            let other = t.recv(rank, partner)?;
            let high = (rank >> k) & 1 == 1;
            match (op, control) {
                (Some(op), _) => {
                    for (own, theirs) in block.iter_mut().zip(&other) {
                        let (mut a0, mut a1) = if high {
                            (*theirs, *own)
                        } else {
                            (*own, *theirs)
                        };
                        op.apply(&mut a0, &mut a1);
                        *own = if high { a1 } else { a0 };
                    }
                }
                (None, Some(c)) if c >= local => {
                    if (rank >> (c - local)) & 1 == 1 {
                        block.copy_from_slice(&other);
                    }
                }
                (None, Some(c)) => {
                    let cmask = 1usize << c;
                    for (i, (own, theirs)) in block.iter_mut().zip(&other).enumerate() {
                        if i & cmask != 0 {
                            *own = *theirs;
                        }
                    }
                }
                (None, None) => unreachable!("exchange needs a gate"),
            }
            Ok(())
        })?;
        self.stats.bytes_sent += block_len * AMP_BYTES * self.blocks.len() as u64;
        self.stats.messages += self.blocks.len() as u64;
        Ok(())
    }

    /// Exchanges a local and a global position, moving half of every block.
    fn swap_positions(&mut self, l: usize, g: usize) -> Result<(), DistributedError> {
        let local = self.local;
        let k = g - local;
        self.on_ranks(|rank, block, t| {
            let partner = rank ^ (1 << k);
            let mine = (rank >> k) & 1;
            // slots whose local bit l differs from this rank's bit k move
            let slots = || (0..block.len()).filter(move |i| (i >> l) & 1 != mine);
            let out: Vec<Complex64> = slots().map(|i| block[i]).collect();
            t.send(rank, partner, out)?;
            let incoming = t.recv(rank, partner)?;
            for (i, v) in slots().zip(incoming) {
                block[i] = v;
            }
            Ok(())
        })?;
        let (ql, qg) = (self.qubit_at[l], self.qubit_at[g]);
        self.qubit_at.swap(l, g);
        self.pos_of[ql] = g;
        self.pos_of[qg] = l;
        self.stats.bytes_sent += self.half_block_bytes() * self.blocks.len() as u64;
        self.stats.messages += self.blocks.len() as u64;
        Ok(())
    }

    /// Swaps position `pos_a` with `pos_b`, one local and one global.
    pub fn remap_qubits(&mut self, pos_a: usize, pos_b: usize) -> Result<(), DistributedError> {
        for pos in [pos_a, pos_b] {
            if pos >= self.n_qubits {
                return Err(DistributedError::Position {
                    pos,
                    n_qubits: self.n_qubits,
                });
            }
        }
        if pos_a == pos_b {
            return Err(DistributedError::SamePosition(pos_a));
        }
        let (l, g) = match (self.is_global(pos_a), self.is_global(pos_b)) {
            (false, true) => (pos_a, pos_b),
            (true, false) => (pos_b, pos_a),
            _ => return Err(DistributedError::NotLocalGlobal { a: pos_a, b: pos_b }),
        };
        self.swap_positions(l, g)?;
        self.stats.remaps += 1;
        Ok(())
    }

    /// The whole state in logical qubit order.
    pub fn gather(&self) -> Result<StateVector, DistributedError> {
        self.gather_with_budget(DEFAULT_MEMORY_BUDGET)
    }

    pub fn gather_with_budget(&self, budget: u128) -> Result<StateVector, DistributedError> {
        let mut out = StateVector::with_budget(self.n_qubits, budget)?;
        let amps = out.amplitudes_mut();
        let logical_bit: Vec<usize> = (0..self.n_qubits)
            .map(|p| 1usize << self.qubit_at[p])
            .collect();
        let scatter = |mut physical: usize| {
            let mut idx = 0;
            let mut p = 0;
            while physical != 0 {
                if physical & 1 == 1 {
                    idx |= logical_bit[p];
                }
                physical >>= 1;
                p += 1;
            }
            idx
        };
        for (rank, block) in self.blocks.iter().enumerate() {
            for (i, a) in block.iter().enumerate() {
                amps[scatter((rank << self.local) | i)] = *a;
            }
        }
        Ok(out)
    }

    /// Single-qubit expectation values. Global qubits are first remapped to a
    /// local position, which is counted as communication.
    pub fn expectation_report(&mut self) -> Result<ExpectationReport, DistributedError> {
        let mut per_qubit = Vec::with_capacity(self.n_qubits);
        for q in 0..self.n_qubits {
            if self.is_global(self.pos_of[q]) {
                if self.local == 0 {
                    let s = self.gather()?;
                    return Ok(s.expectation_report());
                }
                let evict = (0..self.local).find(|&p| self.qubit_at[p] < q).unwrap_or(0);
                self.remap_qubits(evict, self.pos_of[q])?;
            }
            let pos = self.pos_of[q];
            let (z, cross) = self
                .blocks
                .iter()
                .map(|b| kernels::pauli_sums(b, pos))
                .fold((0.0, Complex64::new(0.0, 0.0)), |(z, x), (pz, px)| {
                    (z + pz, x + px)
                });
            per_qubit.push(crate::statevector::q_values(z, cross));
        }
        Ok(ExpectationReport { per_qubit })
    }
}

/// Applies a gate that needs no partner data. `gate` is in physical
/// positions; global positions read their bit from `rank`.
fn apply_on_rank(rank: usize, block: &mut [Complex64], gate: &Gate, local: usize) {
    let qs = gate.qubits();
    let global = |p: usize| p >= local;
    let bit = |p: usize| (rank >> (p - local)) & 1 == 1;
    if qs.iter().all(|&p| !global(p)) {
        kernels::apply_gate(block, gate);
        return;
    }
    match gate.kind() {
        GateKind::Cz => match (global(qs[0]), global(qs[1])) {
            (true, true) => {
                if bit(qs[0]) && bit(qs[1]) {
                    block.iter_mut().for_each(|a| *a = -*a);
                }
            }
            (true, false) if bit(qs[0]) => kernels::apply_gate(block, &Gate::z(qs[1])),
            (false, true) if bit(qs[1]) => kernels::apply_gate(block, &Gate::z(qs[0])),
            _ => {}
        },
        GateKind::Cnot => {
            assert!(!global(qs[1]), "CNOT target must be local");
            if bit(qs[0]) {
                kernels::apply_gate(block, &Gate::x(qs[1]));
            }
        }
        GateKind::I => {}
        _ => {
            let (d0, d1) = gate
                .diagonal()
                .expect("non-diagonal gate on a global position");
            let f = if bit(qs[0]) { d1 } else { d0 };
            if f != Complex64::new(1.0, 0.0) {
                block.iter_mut().for_each(|a| *a *= f);
            }
        }
    }
}

/// `|0...0>` over `config.ranks` ranks followed by every gate of `c`.
pub fn run_circuit_distributed(
    c: &Circuit,
    config: DistributedConfig,
) -> Result<DistributedState, DistributedError> {
    let mut d = DistributedState::new(c.n_qubits(), config)?;
    d.apply_circuit(c)?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gen_ghz_chain, gen_random_circuit, random_gate_sequence};
    use crate::statevector::run_circuit;

    fn max_dev(a: &StateVector, b: &StateVector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn is_bijection(d: &DistributedState) -> bool {
        let mut seen = vec![false; d.n_qubits()];
        for &q in d.perm() {
            if seen[q] {
                return false;
            }
            seen[q] = true;
        }
        d.perm()
            .iter()
            .enumerate()
            .all(|(p, &q)| d.positions()[q] == p)
    }

    #[test]
    fn partition_shapes_and_guards() {
        let d = partition_state(3, 2).unwrap();
        assert_eq!(d.blocks().len(), 2);
        assert_eq!(
            d.blocks()[0],
            vec![Complex64::new(1.0, 0.0), 0.0.into(), 0.0.into(), 0.0.into()]
        );
        let d = partition_state(3, 8).unwrap();
        assert!(d.blocks().iter().all(|b| b.len() == 1));
        assert!(matches!(
            partition_state(3, 3),
            Err(DistributedError::RanksNotPowerOfTwo(3))
        ));
        assert!(matches!(
            partition_state(2, 8),
            Err(DistributedError::TooManyRanks { .. })
        ));
        assert_eq!(
            partition_state(4, 4).unwrap().gather().unwrap(),
            StateVector::new(4).unwrap()
        );
    }

    #[test]
    fn plans_for_global_and_local_gates() {
        let d = partition_state(4, 2).unwrap();
        let p = d.plan_gate(&Gate::h(3), None);
        assert_eq!(p.kind, CommKind::Remap);
        assert_eq!(p.bytes_per_rank, 64);
        assert_eq!(p.partner_offsets, vec![1]);
        let mut x = partition_state(4, 2).unwrap();
        x.set_policy(CommPolicy::AlwaysExchange);
        let p = x.plan_gate(&Gate::h(3), None);
        assert_eq!((p.kind, p.bytes_per_rank), (CommKind::PairExchange, 128));
        assert_eq!(d.plan_gate(&Gate::cz(2, 3), None), CommPlan::local());
        assert_eq!(d.plan_gate(&Gate::h(0), None), CommPlan::local());
        for g in [
            Gate::z(3),
            Gate::s(3),
            Gate::t(3),
            Gate::rz(3, 0.4),
            Gate::cnot(3, 0),
            Gate::swap(0, 3),
        ] {
            assert_eq!(d.plan_gate(&g, None).kind, CommKind::Local, "{g}");
        }
    }

    #[test]
    fn greedy_prefers_exchange_when_the_evicted_qubit_is_needed_next() {
        let d = partition_state(3, 2).unwrap();
        let plan = d.plan_gate(&Gate::cnot(0, 2), Some(&Gate::h(0)));
        assert_eq!(
            (plan.kind, plan.swaps.clone()),
            (CommKind::Remap, vec![(1, 2)])
        );
        // one local position, which the next gate needs
        let d = partition_state(2, 2).unwrap();
        let plan = d.plan_gate(&Gate::h(1), Some(&Gate::h(0)));
        assert_eq!(plan.kind, CommKind::PairExchange);
        assert_eq!(d.plan_gate(&Gate::h(1), None).kind, CommKind::Remap);
    }

    #[test]
    fn ghz_matches_exact_and_needs_at_most_r_remaps() {
        for (n, ranks) in [(6, 4), (8, 8), (10, 2), (6, 1)] {
            let c = gen_ghz_chain(n).unwrap();
            let d = run_circuit_distributed(&c, DistributedConfig::new(ranks)).unwrap();
            assert!(max_dev(&d.gather().unwrap(), &run_circuit(&c).unwrap()) <= 1e-12);
            assert!(
                d.stats().remaps <= ranks.trailing_zeros() as u64,
                "{:?}",
                d.stats()
            );
            assert_eq!(d.stats().pair_exchanges, 0);
        }
    }

    #[test]
    fn diagonal_circuit_sends_nothing() {
        let mut d = partition_state(6, 4).unwrap();
        for q in 0..6 {
            d.apply_gate(&Gate::t(q)).unwrap();
            d.apply_gate(&Gate::rz(q, 0.3 * q as f64)).unwrap();
            d.apply_gate(&Gate::cz(q, (q + 1) % 6)).unwrap();
            d.apply_gate(&Gate::s(q)).unwrap();
        }
        assert_eq!(d.stats().bytes_sent, 0);
    }

    #[test]
    fn results_do_not_depend_on_rank_count_or_policy() {
        let c = gen_random_circuit(2, 5, 12, 8).unwrap();
        let exact = run_circuit(&c).unwrap();
        for ranks in [1, 2, 4, 8] {
            for policy in [
                CommPolicy::Greedy,
                CommPolicy::AlwaysRemap,
                CommPolicy::AlwaysExchange,
            ] {
                let cfg = DistributedConfig {
                    policy,
                    ..DistributedConfig::new(ranks)
                };
                let d = run_circuit_distributed(&c, cfg).unwrap();
                assert!(
                    max_dev(&d.gather().unwrap(), &exact) <= 1e-12,
                    "R={ranks} {policy:?}"
                );
                assert!(is_bijection(&d));
            }
        }
    }

    #[test]
    fn every_gate_kind_with_all_qubits_global() {
        let c = random_gate_sequence(3, 200, 21);
        let exact = run_circuit(&c).unwrap();
        for ranks in [4, 8] {
            let d = run_circuit_distributed(&c, DistributedConfig::new(ranks)).unwrap();
            assert!(max_dev(&d.gather().unwrap(), &exact) <= 1e-12, "R={ranks}");
        }
    }

    #[test]
    fn remap_keeps_the_gathered_state() {
        let mut d = partition_state(2, 2).unwrap();
        d.apply_circuit(&gen_ghz_chain(2).unwrap()).unwrap();
        let before = d.gather().unwrap();
        let perm = d.perm().to_vec();
        d.remap_qubits(0, 1).unwrap();
        assert_eq!(d.gather().unwrap(), before);
        d.remap_qubits(0, 1).unwrap();
        assert_eq!(d.perm(), perm.as_slice());
        assert!(matches!(
            d.remap_qubits(1, 1),
            Err(DistributedError::SamePosition(1))
        ));
        assert!(matches!(
            d.remap_qubits(0, 5),
            Err(DistributedError::Position { .. })
        ));
    }

    #[test]
    fn expectations_match_exact_engine() {
        let c = gen_random_circuit(2, 4, 8, 2).unwrap();
        let exact = run_circuit(&c).unwrap().expectation_report();
        let mut d = run_circuit_distributed(&c, DistributedConfig::new(4)).unwrap();
        let got = d.expectation_report().unwrap();
        for (a, b) in got.per_qubit.iter().zip(&exact.per_qubit) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn gather_respects_budget() {
        let d = partition_state(10, 2).unwrap();
        assert!(matches!(
            d.gather_with_budget(1024),
            Err(DistributedError::Sim(SimError::MemoryBudget { .. }))
        ));
    }
}
