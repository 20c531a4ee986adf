//! Benchmark sweeps and their CSV rows.

use std::io::Write;

use qcsim::circuit::{gen_ghz_chain, gen_random_circuit};
use serde::{Deserialize, Serialize};

use crate::memory::{peak_memory_bytes, reset_peak_memory};
use crate::runner::{execute, Backend, HarnessError, RunOptions, RunOutcome, TargetSpec};

/// One benchmark measurement.
///
/// `gate_count` is the number of operations timed: gates plus one
/// expectation measurement per qubit where the workload includes them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub circuit: String,
    pub n_qubits: usize,
    pub backend: String,
    pub ranks: usize,
    pub threads: usize,
    pub partitions: String,
    pub s: Option<usize>,
    pub m: Option<u64>,
    pub depth: Option<usize>,
    pub gate_count: usize,
    pub elapsed_s: Option<f64>,
    pub seconds_per_gate: Option<f64>,
    pub normalized_time: Option<f64>,
    pub peak_memory_bytes: Option<u64>,
    /// `ok`, or why the row was not measured.
    pub status: String,
}

impl BenchRecord {
    fn from_outcome(o: &RunOutcome, depth: Option<usize>, peak: Option<u64>) -> Self {
        let elapsed = o.elapsed.as_secs_f64();
        BenchRecord {
            circuit: o.circuit.clone(),
            n_qubits: o.n_qubits,
            backend: o.backend.name().into(),
            ranks: o.ranks,
            threads: o.threads,
            partitions: o.partitions.clone().unwrap_or_default(),
            s: o.s,
            m: o.m.map(|m| m as u64),
            depth,
            gate_count: o.gate_ops,
            elapsed_s: Some(elapsed),
            seconds_per_gate: Some(elapsed / o.gate_ops.max(1) as f64),
            normalized_time: None,
            peak_memory_bytes: peak,
            status: "ok".into(),
        }
    }

    fn refused(
        circuit: &qcsim::Circuit,
        opts: &RunOptions,
        depth: Option<usize>,
        err: &HarnessError,
    ) -> Self {
        BenchRecord {
            circuit: circuit.name().into(),
            n_qubits: circuit.n_qubits(),
            backend: opts.backend.name().into(),
            ranks: opts.ranks,
            threads: opts.threads,
            partitions: opts.partitions.clone().unwrap_or_default(),
            s: None,
            m: None,
            depth,
            gate_count: circuit.len()
                + if opts.expectations {
                    circuit.n_qubits()
                } else {
                    0
                },
            elapsed_s: None,
            seconds_per_gate: None,
            normalized_time: None,
            peak_memory_bytes: None,
            status: format!("refused: {err}"),
        }
    }
}

/// Runs one row; memory refusals become rows, other errors propagate.
fn measure(
    c: &qcsim::Circuit,
    opts: &RunOptions,
    depth: Option<usize>,
) -> Result<BenchRecord, HarnessError> {
    reset_peak_memory();
    match execute(c, opts) {
        Ok(o) => Ok(BenchRecord::from_outcome(&o, depth, peak_memory_bytes())),
        Err(e) if e.is_memory_refusal() => Ok(BenchRecord::refused(c, opts, depth, &e)),
        Err(e) => Err(e),
    }
}

/// Divides every row's time per gate by that of `rows[baseline]`. Rows stay
/// unnormalized when the baseline has no timing.
pub fn normalize(rows: &mut [BenchRecord], baseline: usize) {
    let Some(base) = rows.get(baseline).and_then(|r| r.seconds_per_gate) else {
        return;
    };
    for r in rows.iter_mut() {
        r.normalized_time = r.seconds_per_gate.map(|t| t / base);
    }
    rows[baseline].normalized_time = Some(1.0);
}

#[derive(Debug, Clone, PartialEq)]
pub struct GhzSweep {
    pub n_min: usize,
    pub n_max: usize,
    pub normalize_at: usize,
    pub opts: RunOptions,
    /// Double the worker threads for every added qubit, starting from
    /// `opts.threads` at `n_min`.
    pub scale_threads: bool,
}

/// GHZ chain plus expectation measurement of all qubits, one row per `N`.
pub fn bench_ghz(sweep: &GhzSweep) -> Result<Vec<BenchRecord>, HarnessError> {
    if !(sweep.n_min <= sweep.normalize_at && sweep.normalize_at <= sweep.n_max) {
        return Err(HarnessError::Usage(format!(
            "need n_min <= normalize_at <= n_max, got {} <= {} <= {}",
            sweep.n_min, sweep.normalize_at, sweep.n_max
        )));
    }
    if sweep.opts.backend == Backend::Pathsum {
        return Err(HarnessError::Usage(
            "bench-ghz runs the exact or adaptive backend".into(),
        ));
    }
    let mut rows = Vec::new();
    for n in sweep.n_min..=sweep.n_max {
        let c = gen_ghz_chain(n).map_err(|e| HarnessError::Usage(e.to_string()))?;
        let mut opts = sweep.opts.clone();
        opts.expectations = true;
        if sweep.scale_threads {
            opts.threads <<= n - sweep.n_min;
        }
        rows.push(measure(&c, &opts, None)?);
    }
    normalize(&mut rows, sweep.normalize_at - sweep.n_min);
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomSweep {
    pub rows: usize,
    pub cols: usize,
    pub depth_min: usize,
    pub depth_max: usize,
    pub seed: u64,
    pub m: u128,
    /// Pathsum options; partitions default to a contiguous bisection.
    pub opts: RunOptions,
}

/// Path-sum runs of seeded random circuits, one row per depth, normalized to
/// the shallowest depth.
pub fn bench_random(sweep: &RandomSweep) -> Result<Vec<BenchRecord>, HarnessError> {
    if sweep.depth_min == 0 || sweep.depth_min > sweep.depth_max {
        return Err(HarnessError::Usage(format!(
            "need 1 <= depth_min <= depth_max, got {}..{}",
            sweep.depth_min, sweep.depth_max
        )));
    }
    let mut opts = sweep.opts.clone();
    opts.backend = Backend::Pathsum;
    opts.expectations = false;
    opts.targets = Some(TargetSpec::Coeffs(sweep.m));
    opts.check()?;
    let mut rows = Vec::new();
    for depth in sweep.depth_min..=sweep.depth_max {
        let c = gen_random_circuit(sweep.rows, sweep.cols, depth, sweep.seed)
            .map_err(|e| HarnessError::Usage(e.to_string()))?;
        rows.push(measure(&c, &opts, Some(depth))?);
    }
    normalize(&mut rows, 0);
    Ok(rows)
}

pub fn write_csv(rows: &[BenchRecord], w: impl Write) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(backend: Backend) -> RunOptions {
        RunOptions {
            repetitions: 1,
            ..RunOptions::new(backend)
        }
    }

    #[test]
    fn ghz_sweep_normalizes_at_baseline() {
        let sweep = GhzSweep {
            n_min: 4,
            n_max: 7,
            normalize_at: 5,
            opts: quick(Backend::Exact),
            scale_threads: false,
        };
        let rows = bench_ghz(&sweep).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].normalized_time, Some(1.0));
        for r in &rows {
            assert_eq!(r.gate_count, 2 * r.n_qubits);
            let t = r.elapsed_s.unwrap() / r.gate_count as f64;
            assert_eq!(r.seconds_per_gate, Some(t));
        }
        let bad = GhzSweep {
            normalize_at: 9,
            ..sweep
        };
        assert!(bench_ghz(&bad).is_err());
    }

    #[test]
    fn refusals_are_rows() {
        let mut opts = quick(Backend::Exact);
        opts.mem_budget = 1 << 10;
        let sweep = GhzSweep {
            n_min: 5,
            n_max: 8,
            normalize_at: 5,
            opts,
            scale_threads: false,
        };
        let rows = bench_ghz(&sweep).unwrap();
        assert_eq!(rows[0].status, "ok");
        assert!(rows[3].status.starts_with("refused"));
        assert_eq!(rows[3].normalized_time, None);
    }

    #[test]
    fn random_sweep_records_cut_counts() {
        let sweep = RandomSweep {
            rows: 2,
            cols: 3,
            depth_min: 2,
            depth_max: 6,
            seed: 4,
            m: 8,
            opts: quick(Backend::Pathsum),
        };
        let rows = bench_random(&sweep).unwrap();
        let s: Vec<usize> = rows.iter().map(|r| r.s.unwrap()).collect();
        assert!(s.windows(2).all(|w| w[0] <= w[1]), "{s:?}");
        assert_eq!(rows[0].normalized_time, Some(1.0));
        assert!(rows
            .iter()
            .all(|r| r.m == Some(8) && r.partitions == "0-2;3-5"));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rows = bench_ghz(&GhzSweep {
            n_min: 3,
            n_max: 4,
            normalize_at: 3,
            opts: quick(Backend::Adaptive),
            scale_threads: false,
        })
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("circuit,n_qubits,backend"));
        assert_eq!(lines.count(), 2);
        let back: Vec<BenchRecord> = csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(back[0].circuit, rows[0].circuit);
        assert_eq!(back[1].normalized_time, rows[1].normalized_time);
    }
}
