//! Memory needed by each backend, without allocating anything.

use qcsim::codec::{encoded_memory_bytes, TABLE_SIZE};
use qcsim::memory_bytes;
use serde::Serialize;

use crate::runner::{Backend, HarnessError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemoryEstimate {
    pub n_qubits: usize,
    pub backend: Backend,
    pub ranks: usize,
    /// Total bytes over all ranks.
    pub bytes: f64,
    pub per_rank_bytes: f64,
    pub note: String,
}

const AMP_BYTES: f64 = 16.0;

/// Exact: `2^(n+4)` bytes. Adaptive: `2^(n+1)` bytes of codes plus the value
/// table. Pathsum: per rank, one complex vector of `max(D_max, M)` entries,
/// with `D_max = 2^widest_block`.
pub fn estimate(
    n: usize,
    backend: Backend,
    ranks: usize,
    widest_block: usize,
    m: u128,
) -> Result<MemoryEstimate, HarnessError> {
    if n == 0 || n > 128 {
        return Err(HarnessError::Usage(format!(
            "qubit count must be in 1..=128, got {n}"
        )));
    }
    if ranks == 0 {
        return Err(HarnessError::Usage("--ranks must be at least 1".into()));
    }
    let table = TABLE_SIZE as f64 * 8.0;
    let (bytes, per_rank, note) = match backend {
        Backend::Exact => {
            let b = if n < 120 {
                memory_bytes(n) as f64
            } else {
                (n as f64 + 4.0).exp2()
            };
            (
                b,
                b / ranks as f64,
                "2^(N+4) bytes of complex amplitudes".to_string(),
            )
        }
        Backend::Adaptive => {
            let b = if n < 120 {
                encoded_memory_bytes(n) as f64
            } else {
                (n as f64 + 1.0).exp2()
            };
            (
                b + table,
                b + table,
                format!("2^(N+1) bytes of codes plus a {table} byte table"),
            )
        }
        Backend::Pathsum => {
            let per = (widest_block as f64).exp2().max(m as f64) * AMP_BYTES;
            (
                per * ranks as f64,
                per,
                format!("max(2^{widest_block}, M = {m}) amplitudes per rank"),
            )
        }
    };
    Ok(MemoryEstimate {
        n_qubits: n,
        backend,
        ranks,
        bytes,
        per_rank_bytes: per_rank,
        note,
    })
}

/// `bytes` with a binary prefix, e.g. `16.00 GiB`.
pub fn human_bytes(bytes: f64) -> String {
    const UNITS: [&str; 9] = ["B", "KiB", "MiB", "GiB", "TiB", "PiB", "EiB", "ZiB", "YiB"];
    let mut v = bytes;
    let mut u = 0;
    while v >= 1024.0 && u + 1 < UNITS.len() {
        v /= 1024.0;
        u += 1;
    }
    format!("{v:.2} {}", UNITS[u])
}

/// `bytes` with a decimal prefix, e.g. `562.95 TB`.
pub fn decimal_bytes(bytes: f64) -> String {
    const UNITS: [&str; 9] = ["B", "kB", "MB", "GB", "TB", "PB", "EB", "ZB", "YB"];
    let mut v = bytes;
    let mut u = 0;
    while v >= 1000.0 && u + 1 < UNITS.len() {
        v /= 1000.0;
        u += 1;
    }
    format!("{v:.2} {}", UNITS[u])
}
