use thiserror::Error;

use crate::bits::BitStringError;

/// Errors raised by the simulation engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(
        "{n_qubits} qubit(s) need {required} bytes of amplitude storage, budget is {budget} bytes"
    )]
    MemoryBudget {
        n_qubits: usize,
        required: u128,
        budget: u128,
    },
    #[error("qubit {qubit} out of range for {n_qubits} qubit(s)")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    Unnormalized { norm_sqr: f64 },
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("cell {index} references unset code {code}")]
    UnsetCode { index: usize, code: u8 },
    #[error(transparent)]
    BitString(#[from] BitStringError),
}
