//! Validation suite, benchmark sweeps and the `qcsim` command-line front end.
//!
//! Sweeps write [`record::BenchRecord`] rows as CSV; `run` and `validate`
//! write JSON. Times are wall-clock medians of [`runner::REPETITIONS`] runs
//! around circuit execution and measurement, excluding parsing and state
//! allocation.

pub mod estimate;
pub mod memory;
pub mod record;
pub mod runner;
pub mod validate;

use num_complex::Complex64;
use serde::Serialize;

use runner::RunOutcome;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Amplitude {
    pub bits: String,
    pub re: f64,
    pub im: f64,
}

/// JSON body written by `qcsim run`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub circuit: String,
    pub n_qubits: usize,
    pub backend: String,
    pub ranks: usize,
    pub threads: usize,
    pub gate_ops: usize,
    pub elapsed_s: f64,
    pub partitions: Option<String>,
    pub s: Option<usize>,
    pub subcircuit_evals: Option<u64>,
    /// `[Q_x, Q_y, Q_z]` per qubit.
    pub expectations: Option<Vec<[f64; 3]>>,
    pub amplitudes: Vec<Amplitude>,
}

impl From<&RunOutcome> for RunReport {
    fn from(o: &RunOutcome) -> Self {
        let amp = |bits: String, a: Complex64| Amplitude {
            bits,
            re: a.re,
            im: a.im,
        };
        RunReport {
            circuit: o.circuit.clone(),
            n_qubits: o.n_qubits,
            backend: o.backend.name().into(),
            ranks: o.ranks,
            threads: o.threads,
            gate_ops: o.gate_ops,
            elapsed_s: o.elapsed.as_secs_f64(),
            partitions: o.partitions.clone(),
            s: o.s,
            subcircuit_evals: o.path_evals,
            expectations: o.expectations.as_ref().map(|e| e.per_qubit.clone()),
            amplitudes: o
                .amplitudes
                .iter()
                .map(|(z, a)| amp(z.to_string(), *a))
                .collect(),
        }
    }
}
