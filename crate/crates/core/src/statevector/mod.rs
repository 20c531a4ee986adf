//! Numerically exact full state-vector engine.
//!
//! Amplitudes are stored as `2^N` double-precision complex numbers, index bit
//! `q` holding the value of qubit `q`. Gates update the vector in place with
//! the strided pair kernels of [`kernels`]; no `2^N x 2^N` operator is ever
//! built. The norm is never renormalized behind the caller's back.

mod dump;
pub mod kernels;

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::bits::BitString;
use crate::circuit::{Circuit, Gate};
use crate::error::SimError;
use crate::rng::Prng;

pub use dump::{read_state_dump, write_state_dump, DumpError, STATE_DUMP_MAGIC};

/// Default amplitude-storage budget for a single state vector (4 GiB).
pub const DEFAULT_MEMORY_BUDGET: u128 = 1 << 32;

/// Bytes of amplitude storage for `n` qubits: `2^(n+4)`.
pub fn memory_bytes(n: usize) -> u128 {
    assert!(n + 4 < 128, "{n} qubits overflow the byte count");
    1u128 << (n + 4)
}

/// Pauli axis for single-qubit expectation values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `<Q_a(i)> = (1 - <sigma_a(i)>) / 2` for every qubit and axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationReport {
    /// `[x, y, z]` per qubit.
    pub per_qubit: Vec<[f64; 3]>,
}

impl ExpectationReport {
    pub fn get(&self, qubit: usize, axis: Axis) -> f64 {
        self.per_qubit[qubit][axis as usize]
    }
}

/// Turns raw pair sums into `(Q_x, Q_y, Q_z)`.
///
/// `<sigma_z> = sum |a0|^2 - |a1|^2`, `<sigma_x> = 2 Re sum conj(a0) a1` and
/// `<sigma_y> = 2 Im sum conj(a0) a1`, where `a0`/`a1` run over the pairs with
/// the qubit in state 0/1.
pub(crate) fn q_values(z: f64, cross: Complex64) -> [f64; 3] {
    [
        (1.0 - 2.0 * cross.re) / 2.0,
        (1.0 - 2.0 * cross.im) / 2.0,
        (1.0 - z) / 2.0,
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits within the default budget.
    pub fn new(n: usize) -> Result<Self, SimError> {
        StateVector::with_budget(n, DEFAULT_MEMORY_BUDGET)
    }

    pub fn with_budget(n: usize, budget: u128) -> Result<Self, SimError> {
        check_budget(n, budget)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits: n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self, SimError> {
        let expected = 1usize.checked_shl(n as u32).ok_or(SimError::SizeMismatch {
            expected: usize::MAX,
            got: amps.len(),
        })?;
        if amps.len() != expected {
            return Err(SimError::SizeMismatch {
                expected,
                got: amps.len(),
            });
        }
        Ok(StateVector { n_qubits: n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    /// Bytes of amplitude storage actually allocated.
    pub fn allocated_bytes(&self) -> usize {
        self.amps.capacity() * std::mem::size_of::<Complex64>()
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
        kernels::apply_gate(&mut self.amps, gate);
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
            kernels::apply_gate(&mut self.amps, g);
        }
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        kernels::norm_sqr(&self.amps)
    }

    pub fn expectation(&self, axis: Axis, qubit: usize) -> Result<f64, SimError> {
        if qubit >= self.n_qubits {
            return Err(SimError::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        let (z, cross) = kernels::pauli_sums(&self.amps, qubit);
        Ok(q_values(z, cross)[axis as usize])
    }

    /// All three expectation values of every qubit.
    pub fn expectation_report(&self) -> ExpectationReport {
        let per_qubit = (0..self.n_qubits)
            .map(|q| {
                let (z, cross) = kernels::pauli_sums(&self.amps, q);
                q_values(z, cross)
            })
            .collect();
        ExpectationReport { per_qubit }
    }

    pub fn amplitude(&self, z: &BitString) -> Result<Complex64, SimError> {
        if z.width() != self.n_qubits {
            return Err(SimError::SizeMismatch {
                expected: self.n_qubits,
                got: z.width(),
            });
        }
        Ok(self.amps[z.index()])
    }

    /// Draws `shots` basis states from `|a_i|^2`; keys are bit strings.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<BTreeMap<String, u64>, SimError> {
        if shots == 0 {
            return Err(SimError::ZeroShots);
        }
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > 1e-6 {
            return Err(SimError::Unnormalized { norm_sqr });
        }
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let mut rng = Prng::new(seed);
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for _ in 0..shots {
            let u = rng.next_f64() * acc;
            let idx = cumulative
                .partition_point(|&c| c <= u)
                .min(self.amps.len() - 1);
            *counts.entry(idx).or_default() += 1;
        }
        Ok(counts
            .into_iter()
            .map(|(i, c)| {
                let label = BitString::new(self.n_qubits, i as u128).expect("index fits width");
                (label.to_string(), c)
            })
            .collect())
    }
}

fn check_budget(n: usize, budget: u128) -> Result<(), SimError> {
    let required = if n + 4 < 128 {
        memory_bytes(n)
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
    Ok(())
}

pub fn init_state(n: usize) -> Result<StateVector, SimError> {
    StateVector::new(n)
}

/// `|0...0>` followed by every gate of `c` in order.
pub fn run_circuit(c: &Circuit) -> Result<StateVector, SimError> {
    run_circuit_with_budget(c, DEFAULT_MEMORY_BUDGET)
}

pub fn run_circuit_with_budget(c: &Circuit, budget: u128) -> Result<StateVector, SimError> {
    let mut s = StateVector::with_budget(c.n_qubits(), budget)?;
    s.apply_circuit(c)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gen_ghz_chain, gen_uniform_superposition};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn init() {
        assert_eq!(
            init_state(1).unwrap().amplitudes(),
            &[c(1.0, 0.0), c(0.0, 0.0)]
        );
        let s = init_state(3).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        let err = StateVector::with_budget(20, 1 << 20).unwrap_err();
        assert_eq!(
            err,
            SimError::MemoryBudget {
                n_qubits: 20,
                required: 1 << 24,
                budget: 1 << 20
            }
        );
        assert!(err.to_string().contains("16777216"));
    }

    #[test]
    fn memory_formula() {
        assert_eq!(memory_bytes(0), 16);
        assert_eq!(memory_bytes(30), 16 << 30);
        assert_eq!(memory_bytes(45), 1u128 << 49);
        assert!(memory_bytes(45) as f64 > 0.5e15 && (memory_bytes(45) as f64) < 0.6e15);
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = init_state(1).unwrap();
        s.apply_gate(&Gate::h(0)).unwrap();
        assert_eq!(
            s.amplitudes(),
            &[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]
        );
    }

    #[test]
    fn cz_flips_only_the_11_amplitude() {
        let amps = vec![c(0.1, 0.2), c(0.3, -0.1), c(-0.4, 0.5), c(0.6, 0.7)];
        let mut s = StateVector::from_amplitudes(2, amps.clone()).unwrap();
        s.apply_gate(&Gate::cz(0, 1)).unwrap();
        assert_eq!(s.amplitudes(), &[amps[0], amps[1], amps[2], -amps[3]]);
    }

    #[test]
    fn x_on_qubit_one_sets_index_two() {
        let mut s = init_state(2).unwrap();
        s.apply_gate(&Gate::x(1)).unwrap();
        assert_eq!(s.amplitudes()[2], c(1.0, 0.0));
        assert_eq!(s.amplitude(&"10".parse().unwrap()).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn out_of_range_gate() {
        let mut s = init_state(2).unwrap();
        assert_eq!(
            s.apply_gate(&Gate::h(2)),
            Err(SimError::QubitOutOfRange {
                qubit: 2,
                n_qubits: 2
            })
        );
    }

    #[test]
    fn bell_and_ghz() {
        let s = run_circuit(&gen_ghz_chain(2).unwrap()).unwrap();
        assert_eq!(
            s.amplitudes(),
            &[
                c(FRAC_1_SQRT_2, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(FRAC_1_SQRT_2, 0.0)
            ]
        );
        for n in [3, 7, 12] {
            let s = run_circuit(&gen_ghz_chain(n).unwrap()).unwrap();
            for (i, a) in s.amplitudes().iter().enumerate() {
                let expected = if i == 0 || i == (1 << n) - 1 {
                    FRAC_1_SQRT_2
                } else {
                    0.0
                };
                assert!((a - c(expected, 0.0)).norm() < 1e-12);
            }
        }
        let s = run_circuit(&gen_ghz_chain(3).unwrap()).unwrap();
        assert!((s.amplitude(&"111".parse().unwrap()).unwrap().re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(s.amplitude(&"101".parse().unwrap()).unwrap(), c(0.0, 0.0));
        assert!(s.amplitude(&"11".parse().unwrap()).is_err());
        let e = s.expectation_report();
        for q in 0..3 {
            assert!((e.get(q, Axis::Z) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_circuit_amplitude() {
        let s = init_state(4).unwrap();
        assert_eq!(
            s.amplitude(&BitString::zeros(4).unwrap()).unwrap(),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn uniform_superposition() {
        for n in [1, 5, 10] {
            let s = run_circuit(&gen_uniform_superposition(n).unwrap()).unwrap();
            let v = 2f64.powf(-(n as f64) / 2.0);
            assert!(s
                .amplitudes()
                .iter()
                .all(|a| (a - c(v, 0.0)).norm() < 1e-12));
            for q in 0..n {
                assert!(s.expectation(Axis::X, q).unwrap().abs() < 1e-12);
                assert!((s.expectation(Axis::Y, q).unwrap() - 0.5).abs() < 1e-12);
                assert!((s.expectation(Axis::Z, q).unwrap() - 0.5).abs() < 1e-12);
            }
        }
        let s = run_circuit(&gen_uniform_superposition(20).unwrap()).unwrap();
        assert!(s
            .amplitudes()
            .iter()
            .all(|a| (a - c(1.0 / 1024.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn expectation_of_product_states() {
        let s = init_state(1).unwrap();
        assert_eq!(s.expectation(Axis::Z, 0).unwrap(), 0.0);
        assert!(s.expectation(Axis::Z, 1).is_err());
        // RY(t)|0> = cos(t/2)|0> + sin(t/2)|1>: <sx> = sin t, <sz> = cos t.
        // S then makes <sy> = sin t.
        let t = 0.7;
        let mut s = init_state(2).unwrap();
        s.apply_gate(&Gate::ry(1, t)).unwrap();
        assert!((s.expectation(Axis::X, 1).unwrap() - (1.0 - t.sin()) / 2.0).abs() < 1e-12);
        assert!((s.expectation(Axis::Z, 1).unwrap() - (1.0 - t.cos()) / 2.0).abs() < 1e-12);
        assert!((s.expectation(Axis::Y, 1).unwrap() - 0.5).abs() < 1e-12);
        s.apply_gate(&Gate::s(1)).unwrap();
        assert!((s.expectation(Axis::Y, 1).unwrap() - (1.0 - t.sin()) / 2.0).abs() < 1e-12);
        assert!((s.expectation(Axis::X, 1).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sampling() {
        let s = init_state(1).unwrap();
        let h = s.sample(100, 1).unwrap();
        assert_eq!(h, BTreeMap::from([("0".to_string(), 100)]));
        assert_eq!(s.sample(0, 1), Err(SimError::ZeroShots));

        let bell = run_circuit(&gen_ghz_chain(2).unwrap()).unwrap();
        let shots = 100_000u64;
        let h = bell.sample(shots, 42).unwrap();
        assert_eq!(h.keys().cloned().collect::<Vec<_>>(), vec!["00", "11"]);
        let sigma = (shots as f64 * 0.25).sqrt();
        for v in h.values() {
            assert!((*v as f64 - shots as f64 / 2.0).abs() < 5.0 * sigma);
        }
        assert_eq!(h, bell.sample(shots, 42).unwrap());

        let unnormalized = StateVector::from_amplitudes(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(
            unnormalized.sample(10, 0),
            Err(SimError::Unnormalized { .. })
        ));
    }

    #[test]
    fn allocation_is_two_to_n_plus_four() {
        for n in [10, 20] {
            let s = init_state(n).unwrap();
            assert_eq!(s.allocated_bytes() as u128, memory_bytes(n));
        }
    }
}
