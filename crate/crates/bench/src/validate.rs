//! Built-in validation suite over circuits with known outcomes.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use qcsim::circuit::{
    gen_ghz_chain, gen_random_circuit, gen_uniform_superposition, rewrite_to_cz_basis,
};
use qcsim::distributed::{run_circuit_distributed, DistributedConfig};
use qcsim::pathsum::{
    compute_amplitudes, cz_path_diagonal, default_bisection, make_partition_plan,
};
use qcsim::pathsum::{CoefficientRequest, PathSumConfig};
use qcsim::statevector::ExpectationReport;
use qcsim::{run_circuit, run_circuit_encoded, Axis, BitString, Circuit};
use serde::Serialize;

use crate::runner::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Default)]
struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, name: impl Into<String>, expected: f64, observed: f64, tolerance: f64) {
        let pass = (observed - expected).abs() <= tolerance;
        self.checks.push(Check {
            name: name.into(),
            expected,
            observed,
            tolerance,
            pass,
        });
    }

    /// Records a failed row for a check that could not run.
    fn error(&mut self, name: impl Into<String>, err: impl std::fmt::Display) {
        let name = format!("{} ({err})", name.into());
        self.checks.push(Check {
            name,
            expected: 0.0,
            observed: f64::NAN,
            tolerance: 0.0,
            pass: false,
        });
    }

    fn finish(self) -> ValidationReport {
        let pass = self.checks.iter().all(|c| c.pass);
        ValidationReport {
            checks: self.checks,
            pass,
        }
    }
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// The value of `axis` on the qubit deviating most from `want`.
fn worst(report: &ExpectationReport, axis: Axis, want: f64) -> f64 {
    (0..report.per_qubit.len())
        .map(|q| report.get(q, axis))
        .max_by(|a, b| (a - want).abs().total_cmp(&(b - want).abs()))
        .unwrap_or(want)
}

fn uniform_checks(suite: &mut Suite, n: usize) -> Result<(), HarnessError> {
    let c = gen_uniform_superposition(n).map_err(|e| HarnessError::Usage(e.to_string()))?;
    let exact = run_circuit(&c)?.expectation_report();
    let adaptive = run_circuit_encoded(&c)?.expectation_report();
    for (backend, report) in [("exact", exact), ("adaptive", adaptive)] {
        for (axis, label, want) in [
            (Axis::X, "x", 0.0),
            (Axis::Y, "y", 0.5),
            (Axis::Z, "z", 0.5),
        ] {
            let name = format!("uniform-{n} {backend} Q{label}");
            suite.record(name, want, worst(&report, axis, want), 1e-12);
        }
    }
    Ok(())
}

fn ghz_checks(suite: &mut Suite, n: usize) -> Result<(), HarnessError> {
    let c = gen_ghz_chain(n).map_err(|e| HarnessError::Usage(e.to_string()))?;
    let state = run_circuit(&c)?;
    let ends = [BitString::zeros(n)?, BitString::ones(n)?];
    for (label, z) in ["0", "1"].iter().zip(&ends) {
        let a = state.amplitude(z)?;
        suite.record(
            format!("ghz-{n} exact |{label}..{label}>"),
            FRAC_1_SQRT_2,
            a.re,
            1e-12,
        );
        suite.record(
            format!("ghz-{n} exact |{label}..{label}> imag"),
            0.0,
            a.im,
            1e-12,
        );
    }
    let cz = rewrite_to_cz_basis(&c);
    let plan = make_partition_plan(
        &cz,
        &default_bisection(n).map_err(qcsim::pathsum::PathSumError::from)?,
    )
    .map_err(qcsim::pathsum::PathSumError::from)?;
    let r = compute_amplitudes(
        &cz,
        &plan,
        &CoefficientRequest::Extremes,
        &PathSumConfig::default(),
    )?;
    for (label, a) in ["0", "1"].iter().zip(&r.amplitudes) {
        let err = (a - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm();
        suite.record(
            format!("ghz-{n} pathsum |{label}..{label}> error"),
            0.0,
            err,
            1e-10,
        );
    }
    Ok(())
}

fn cross_backend_checks(
    suite: &mut Suite,
    c: &Circuit,
    pathsum: &Circuit,
) -> Result<(), HarnessError> {
    let n = c.n_qubits();
    let want = run_circuit(c)?;
    let enc = run_circuit_encoded(c)?;
    suite.record(
        format!("{} adaptive vs exact", c.name()),
        0.0,
        enc.max_abs_error(&want)?,
        5e-3,
    );
    for ranks in [1, 2, 4] {
        let d = run_circuit_distributed(c, DistributedConfig::new(ranks))?;
        let err = max_abs_diff(d.gather()?.amplitudes(), want.amplitudes());
        suite.record(
            format!("{} distributed R={ranks} vs exact", c.name()),
            0.0,
            err,
            1e-12,
        );
    }
    let exact = run_circuit(pathsum)?;
    let cz = rewrite_to_cz_basis(pathsum);
    let blocks = default_bisection(n).map_err(qcsim::pathsum::PathSumError::from)?;
    let plan = make_partition_plan(&cz, &blocks).map_err(qcsim::pathsum::PathSumError::from)?;
    let r = compute_amplitudes(
        &cz,
        &plan,
        &CoefficientRequest::First(1 << n),
        &PathSumConfig::default(),
    )?;
    let err = max_abs_diff(&r.amplitudes, exact.amplitudes());
    let name = format!("{} pathsum (S={}) vs exact", pathsum.name(), plan.s());
    suite.record(name, 0.0, err, 1e-10);
    Ok(())
}

fn cz_identity_check(suite: &mut Suite) {
    let (p, m) = (cz_path_diagonal(1), cz_path_diagonal(-1));
    let mut worst = 0.0f64;
    for idx in 0..4usize {
        let pick = |d: (Complex64, Complex64), bit: usize| if bit == 0 { d.0 } else { d.1 };
        let (a, b) = (idx & 1, idx >> 1);
        let sum = (pick(p, a) * pick(p, b) + pick(m, a) * pick(m, b)) * 0.5;
        let want = if idx == 3 { -1.0 } else { 1.0 };
        worst = worst.max((sum - Complex64::new(want, 0.0)).norm());
    }
    suite.record("cz path-sum reconstruction", 0.0, worst, 1e-12);
}

/// Runs the suite on registers of at most `max_qubits` qubits. Failures
/// become report rows; nothing here aborts.
pub fn validate(max_qubits: usize) -> ValidationReport {
    let mut suite = Suite::default();
    for n in [4, 12, 20].into_iter().filter(|&n| n <= max_qubits) {
        if let Err(e) = uniform_checks(&mut suite, n) {
            suite.error(format!("uniform-{n}"), e);
        }
    }
    for n in [2, 8, 16, 24].into_iter().filter(|&n| n <= max_qubits) {
        if let Err(e) = ghz_checks(&mut suite, n) {
            suite.error(format!("ghz-{n}"), e);
        }
    }
    if max_qubits >= 10 {
        let circuits =
            gen_random_circuit(2, 5, 20, 1).and_then(|c| Ok((c, gen_random_circuit(2, 5, 8, 1)?)));
        match circuits {
            Ok((deep, shallow)) => {
                if let Err(e) = cross_backend_checks(&mut suite, &deep, &shallow) {
                    suite.error("random 2x5", e);
                }
            }
            Err(e) => suite.error("random 2x5", e),
        }
    }
    cz_identity_check(&mut suite);
    suite.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let r = validate(10);
        assert!(
            r.pass,
            "{:#?}",
            r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
        );
        assert!(r
            .checks
            .iter()
            .any(|c| c.name.starts_with("uniform-4 adaptive")));
        assert!(r.checks.iter().any(|c| c.name.contains("distributed R=4")));
    }

    #[test]
    fn a_failing_row_fails_the_report() {
        let mut s = Suite::default();
        s.record("ok", 1.0, 1.0, 0.0);
        s.record("off", 1.0, 1.5, 0.1);
        let r = s.finish();
        assert!(!r.pass);
        assert!(r.checks[0].pass && !r.checks[1].pass);
    }
}
