//! Qubit partitions and the CZ gates they cut.

use thiserror::Error;

use crate::circuit::{Circuit, GateKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition spec: {0}")]
    Spec(String),
    #[error("block {0} is empty")]
    EmptyBlock(usize),
    #[error("qubit {qubit} out of range for {n_qubits} qubit(s)")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("qubit {0} is in more than one block")]
    Overlap(usize),
    #[error("qubit {0} is in no block")]
    Missing(usize),
    #[error("gate {index} is a {kind}; rewrite to single-qubit gates and CZ first")]
    NonCzEntangler { index: usize, kind: GateKind },
    #[error("a bisection needs at least 2 qubits, got {0}")]
    TooFewQubits(usize),
}

/// Parses blocks such as `"0-20;21-41"` or `"0,2,4;1,3,5"`: blocks separated
/// by `;`, each a comma-separated list of qubits and inclusive ranges.
pub fn parse_partition_spec(spec: &str) -> Result<Vec<Vec<usize>>, PartitionError> {
    let parse_num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| PartitionError::Spec(format!("bad qubit index {t:?}")))
    };
    spec.split(';')
        .map(|block| {
            let mut qubits = Vec::new();
            for item in block.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match item.split_once('-') {
                    Some((a, b)) => {
                        let (a, b) = (parse_num(a)?, parse_num(b)?);
                        if a > b {
                            return Err(PartitionError::Spec(format!("descending range {item:?}")));
                        }
                        qubits.extend(a..=b);
                    }
                    None => qubits.push(parse_num(item)?),
                }
            }
            Ok(qubits)
        })
        .collect()
}

/// `{0 .. n/2-1}` and `{n/2 .. n-1}`.
pub fn default_bisection(n: usize) -> Result<Vec<Vec<usize>>, PartitionError> {
    if n < 2 {
        return Err(PartitionError::TooFewQubits(n));
    }
    Ok(vec![(0..n / 2).collect(), (n / 2..n).collect()])
}

/// Partitions of the qubits plus the CZ gates of one circuit that cross them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    n_qubits: usize,
    n_gates: usize,
    partitions: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    /// bit position of each qubit inside its block
    local_bit: Vec<usize>,
    cut_gates: Vec<usize>,
}

impl PartitionPlan {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Blocks in the given order, each sorted ascending; a qubit's position
    /// in its block is its bit in the block's local index.
    pub fn partitions(&self) -> &[Vec<usize>] {
        &self.partitions
    }

    pub fn n_partitions(&self) -> usize {
        self.partitions.len()
    }

    pub fn block_of(&self, qubit: usize) -> usize {
        self.block_of[qubit]
    }

    pub fn local_bit(&self, qubit: usize) -> usize {
        self.local_bit[qubit]
    }

    /// `log2 D_p` per partition.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.partitions.iter().map(Vec::len).collect()
    }

    /// `D_p = 2^|p|` per partition, as reals since blocks may be wide.
    pub fn subspace_dims(&self) -> Vec<f64> {
        self.partitions
            .iter()
            .map(|p| (p.len() as f64).exp2())
            .collect()
    }

    /// Indices into the circuit's gate list of the CZ gates crossing blocks.
    pub fn cut_gates(&self) -> &[usize] {
        &self.cut_gates
    }

    /// Number of cut CZ gates.
    pub fn s(&self) -> usize {
        self.cut_gates.len()
    }

    /// Gate count of the circuit the plan was built from.
    pub fn n_gates(&self) -> usize {
        self.n_gates
    }
}

/// Checks that `blocks` partition the qubits of `c` and finds the cut CZs.
pub fn make_partition_plan(
    c: &Circuit,
    blocks: &[Vec<usize>],
) -> Result<PartitionPlan, PartitionError> {
    let n = c.n_qubits();
    let mut block_of = vec![usize::MAX; n];
    let mut partitions = Vec::with_capacity(blocks.len());
    for (b, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(PartitionError::EmptyBlock(b));
        }
        let mut sorted = block.clone();
        sorted.sort_unstable();
        for &q in &sorted {
            if q >= n {
                return Err(PartitionError::QubitOutOfRange {
                    qubit: q,
                    n_qubits: n,
                });
            }
            if block_of[q] != usize::MAX {
                return Err(PartitionError::Overlap(q));
            }
            block_of[q] = b;
        }
        partitions.push(sorted);
    }
    if let Some(q) = block_of.iter().position(|&b| b == usize::MAX) {
        return Err(PartitionError::Missing(q));
    }
    let mut local_bit = vec![0; n];
    for block in &partitions {
        for (j, &q) in block.iter().enumerate() {
            local_bit[q] = j;
        }
    }
    let mut cut_gates = Vec::new();
    for (index, g) in c.gates().iter().enumerate() {
        match g.kind() {
            GateKind::Cz => {
                let qs = g.qubits();
                if block_of[qs[0]] != block_of[qs[1]] {
                    cut_gates.push(index);
                }
            }
            kind if kind.arity() == 2 => {
                return Err(PartitionError::NonCzEntangler { index, kind })
            }
            _ => {}
        }
    }
    Ok(PartitionPlan {
        n_qubits: n,
        n_gates: c.len(),
        partitions,
        block_of,
        local_bit,
        cut_gates,
    })
}
