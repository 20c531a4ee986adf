//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered list of [`Gate`]s over `n_qubits` qubits; gates
//! are applied left to right to the initial state. Qubit indices follow the
//! crate-wide convention that qubit 0 is the least-significant bit of a basis
//! state index.

mod depth;
mod generate;
mod native;
mod qasm;
mod rewrite;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use smallvec::SmallVec;
use thiserror::Error;

pub use depth::{compute_depth, LayerSchedule};
pub use generate::{
    gen_ghz_chain, gen_random_circuit, gen_uniform_superposition, random_gate_sequence,
    GeneratorError,
};
pub use native::{emit_circuit, parse_circuit, ParseError};
pub use qasm::{parse_openqasm, QasmError};
pub use rewrite::rewrite_to_cz_basis;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

/// Gate mnemonics understood by every engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    /// Square root of X.
    V,
    /// Square root of Y.
    Vy,
    Rx,
    Ry,
    Rz,
    U3,
    Cnot,
    Cz,
    Swap,
    /// General (possibly non-unitary) diagonal single-qubit operator.
    Diag1,
}

impl GateKind {
    pub const ALL: [GateKind; 19] = [
        GateKind::I,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::V,
        GateKind::Vy,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::U3,
        GateKind::Cnot,
        GateKind::Cz,
        GateKind::Swap,
        GateKind::Diag1,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::I => "I",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::T => "T",
            GateKind::Tdg => "TDG",
            GateKind::V => "V",
            GateKind::Vy => "VY",
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::U3 => "U3",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Swap => "SWAP",
            GateKind::Diag1 => "DIAG1",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::Swap => 2,
            _ => 1,
        }
    }

    /// Number of real parameters. `DIAG1` stores its two complex diagonal
    /// entries as `[re0, im0, re1, im1]`.
    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::U3 => 3,
            GateKind::Diag1 => 4,
            _ => 0,
        }
    }

    pub fn is_diagonal(self) -> bool {
        matches!(
            self,
            GateKind::I
                | GateKind::Z
                | GateKind::S
                | GateKind::Sdg
                | GateKind::T
                | GateKind::Tdg
                | GateKind::Rz
                | GateKind::Cz
                | GateKind::Diag1
        )
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

impl FromStr for GateKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.mnemonic().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("{kind} acts on {expected} qubit(s), got {got}")]
    Arity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("{kind} takes {expected} parameter(s), got {got}")]
    Params {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("{kind} applied twice to qubit {qubit}")]
    RepeatedQubit { kind: GateKind, qubit: usize },
    #[error("qubit index {qubit} out of range for {n_qubits} qubit(s)")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
}

/// Dense matrix of a one- or two-qubit gate.
///
/// For two-qubit gates the basis index is `b0 + 2*b1`, where `b0` is the value
/// of `qubits()[0]` and `b1` that of `qubits()[1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateMatrix {
    Single([[Complex64; 2]; 2]),
    Two([[Complex64; 4]; 4]),
}

impl GateMatrix {
    pub fn dim(&self) -> usize {
        match self {
            GateMatrix::Single(_) => 2,
            GateMatrix::Two(_) => 4,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        match self {
            GateMatrix::Single(m) => m[row][col],
            GateMatrix::Two(m) => m[row][col],
        }
    }

    /// Largest entry of `|U^dagger U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = C0;
                for k in 0..d {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                let target = if i == j { C1 } else { C0 };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }
}

/// A gate applied to specific qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    qubits: SmallVec<[usize; 2]>,
    params: SmallVec<[f64; 4]>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], params: &[f64]) -> Result<Self, GateError> {
        if qubits.len() != kind.arity() {
            return Err(GateError::Arity {
                kind,
                expected: kind.arity(),
                got: qubits.len(),
            });
        }
        if params.len() != kind.param_count() {
            return Err(GateError::Params {
                kind,
                expected: kind.param_count(),
                got: params.len(),
            });
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(GateError::RepeatedQubit {
                kind,
                qubit: qubits[0],
            });
        }
        Ok(Gate {
            kind,
            qubits: SmallVec::from_slice(qubits),
            params: SmallVec::from_slice(params),
        })
    }

    fn fixed(kind: GateKind, qubits: &[usize]) -> Self {
        Gate::new(kind, qubits, &[]).expect("fixed gate constructor")
    }

    pub fn id(q: usize) -> Self {
        Gate::fixed(GateKind::I, &[q])
    }
    pub fn x(q: usize) -> Self {
        Gate::fixed(GateKind::X, &[q])
    }
    pub fn y(q: usize) -> Self {
        Gate::fixed(GateKind::Y, &[q])
    }
    pub fn z(q: usize) -> Self {
        Gate::fixed(GateKind::Z, &[q])
    }
    pub fn h(q: usize) -> Self {
        Gate::fixed(GateKind::H, &[q])
    }
    pub fn s(q: usize) -> Self {
        Gate::fixed(GateKind::S, &[q])
    }
    pub fn sdg(q: usize) -> Self {
        Gate::fixed(GateKind::Sdg, &[q])
    }
    pub fn t(q: usize) -> Self {
        Gate::fixed(GateKind::T, &[q])
    }
    pub fn tdg(q: usize) -> Self {
        Gate::fixed(GateKind::Tdg, &[q])
    }
    pub fn v(q: usize) -> Self {
        Gate::fixed(GateKind::V, &[q])
    }
    pub fn vy(q: usize) -> Self {
        Gate::fixed(GateKind::Vy, &[q])
    }
    pub fn rx(q: usize, theta: f64) -> Self {
        Gate::new(GateKind::Rx, &[q], &[theta]).expect("rx")
    }
    pub fn ry(q: usize, theta: f64) -> Self {
        Gate::new(GateKind::Ry, &[q], &[theta]).expect("ry")
    }
    pub fn rz(q: usize, theta: f64) -> Self {
        Gate::new(GateKind::Rz, &[q], &[theta]).expect("rz")
    }
    pub fn u3(q: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Gate::new(GateKind::U3, &[q], &[theta, phi, lambda]).expect("u3")
    }
    /// Panics if `control == target`.
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::fixed(GateKind::Cnot, &[control, target])
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Gate::fixed(GateKind::Cz, &[a, b])
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Gate::fixed(GateKind::Swap, &[a, b])
    }
    pub fn diag1(q: usize, d0: Complex64, d1: Complex64) -> Self {
        Gate::new(GateKind::Diag1, &[q], &[d0.re, d0.im, d1.re, d1.im]).expect("diag1")
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn is_diagonal(&self) -> bool {
        self.kind.is_diagonal()
    }

    pub fn touches(&self, q: usize) -> bool {
        self.qubits.contains(&q)
    }

    /// Same gate acting on a different set of qubits.
    pub fn with_qubits(&self, qubits: &[usize]) -> Result<Self, GateError> {
        Gate::new(self.kind, qubits, &self.params)
    }

    /// Relabels qubits through `map` (old index -> new index).
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Self {
        let mut g = self.clone();
        for q in g.qubits.iter_mut() {
            *q = map(*q);
        }
        g
    }

    /// Diagonal entries of a diagonal single-qubit gate.
    pub fn diagonal(&self) -> Option<(Complex64, Complex64)> {
        if self.kind.arity() != 1 || !self.kind.is_diagonal() {
            return None;
        }
        match self.matrix() {
            GateMatrix::Single(m) => Some((m[0][0], m[1][1])),
            GateMatrix::Two(_) => None,
        }
    }

    pub fn matrix(&self) -> GateMatrix {
        use GateKind::*;
        let p = &self.params;
        let half = Complex64::new(0.5, 0.0);
        let single = |m: [[Complex64; 2]; 2]| GateMatrix::Single(m);
        let r = |x: f64| Complex64::new(x, 0.0);
        match self.kind {
            I => single([[C1, C0], [C0, C1]]),
            X => single([[C0, C1], [C1, C0]]),
            Y => single([[C0, -CI], [CI, C0]]),
            Z => single([[C1, C0], [C0, -C1]]),
            H => single([
                [r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)],
                [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)],
            ]),
            S => single([[C1, C0], [C0, CI]]),
            Sdg => single([[C1, C0], [C0, -CI]]),
            T => single([[C1, C0], [C0, Complex64::from_polar(1.0, FRAC_PI_4)]]),
            Tdg => single([[C1, C0], [C0, Complex64::from_polar(1.0, -FRAC_PI_4)]]),
            V => {
                let a = half * Complex64::new(1.0, 1.0);
                let b = half * Complex64::new(1.0, -1.0);
                single([[a, b], [b, a]])
            }
            Vy => {
                let a = half * Complex64::new(1.0, 1.0);
                single([[a, -a], [a, a]])
            }
            Rx => {
                let (s, c) = (p[0] / 2.0).sin_cos();
                single([
                    [r(c), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), r(c)],
                ])
            }
            Ry => {
                let (s, c) = (p[0] / 2.0).sin_cos();
                single([[r(c), r(-s)], [r(s), r(c)]])
            }
            Rz => single([
                [Complex64::from_polar(1.0, -p[0] / 2.0), C0],
                [C0, Complex64::from_polar(1.0, p[0] / 2.0)],
            ]),
            U3 => {
                // [[cos(t/2), -e^{i l} sin(t/2)], [e^{i f} sin(t/2), e^{i(f+l)} cos(t/2)]]
                let (theta, phi, lambda) = (p[0], p[1], p[2]);
                let (s, c) = (theta / 2.0).sin_cos();
                single([
                    [r(c), -Complex64::from_polar(s, lambda)],
                    [
                        Complex64::from_polar(s, phi),
                        Complex64::from_polar(c, phi + lambda),
                    ],
                ])
            }
            Diag1 => single([
                [Complex64::new(p[0], p[1]), C0],
                [C0, Complex64::new(p[2], p[3])],
            ]),
            Cnot => {
                // control = qubits[0] (b0), target = qubits[1] (b1)
                let mut m = [[C0; 4]; 4];
                m[0][0] = C1;
                m[2][2] = C1;
                m[1][3] = C1;
                m[3][1] = C1;
                GateMatrix::Two(m)
            }
            Cz => {
                let mut m = [[C0; 4]; 4];
                m[0][0] = C1;
                m[1][1] = C1;
                m[2][2] = C1;
                m[3][3] = -C1;
                GateMatrix::Two(m)
            }
            Swap => {
                let mut m = [[C0; 4]; 4];
                m[0][0] = C1;
                m[1][2] = C1;
                m[2][1] = C1;
                m[3][3] = C1;
                GateMatrix::Two(m)
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for q in &self.qubits {
            write!(f, " {q}")?;
        }
        for p in &self.params {
            write!(f, " {p:.16E}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("circuit needs at least one qubit")]
    NoQubits,
    #[error("gate #{index} ({gate}): {source}")]
    Gate {
        index: usize,
        gate: String,
        #[source]
        source: GateError,
    },
}

/// Ordered gate list over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    name: String,
}

impl Circuit {
    pub fn new(n_qubits: usize, name: impl Into<String>) -> Result<Self, CircuitError> {
        if n_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        Ok(Circuit {
            n_qubits,
            gates: Vec::new(),
            name: name.into(),
        })
    }

    pub fn from_gates(
        n_qubits: usize,
        gates: Vec<Gate>,
        name: impl Into<String>,
    ) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(n_qubits, name)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        if let Some(&q) = gate.qubits().iter().find(|&&q| q >= self.n_qubits) {
            return Err(CircuitError::Gate {
                index: self.gates.len(),
                gate: gate.to_string(),
                source: GateError::QubitOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                },
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    /// Same gates in the same order, ignoring the name.
    pub fn same_gates(&self, other: &Circuit) -> bool {
        self.n_qubits == other.n_qubits && self.gates == other.gates
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn all_fixed_kinds_are_unitary() {
        let gates = [
            Gate::id(0),
            Gate::x(0),
            Gate::y(0),
            Gate::z(0),
            Gate::h(0),
            Gate::s(0),
            Gate::sdg(0),
            Gate::t(0),
            Gate::tdg(0),
            Gate::v(0),
            Gate::vy(0),
            Gate::rx(0, 0.3),
            Gate::ry(0, -1.7),
            Gate::rz(0, 2.9),
            Gate::u3(0, 0.4, 1.1, -2.2),
            Gate::cnot(0, 1),
            Gate::cz(0, 1),
            Gate::swap(0, 1),
        ];
        for g in &gates {
            assert!(g.matrix().unitarity_defect() < 1e-12, "{g}");
        }
    }

    #[test]
    fn square_roots_square_to_paulis() {
        for (root, pauli) in [(Gate::v(0), Gate::x(0)), (Gate::vy(0), Gate::y(0))] {
            let (GateMatrix::Single(r), GateMatrix::Single(p)) = (root.matrix(), pauli.matrix())
            else {
                unreachable!()
            };
            for i in 0..2 {
                for j in 0..2 {
                    let sq = r[i][0] * r[0][j] + r[i][1] * r[1][j];
                    assert!(approx(sq, p[i][j]), "{root}");
                }
            }
        }
    }

    #[test]
    fn u3_half_pi_zero_pi_is_hadamard() {
        let u = Gate::u3(0, std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::PI).matrix();
        let h = Gate::h(0).matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert!(approx(u.get(i, j), h.get(i, j)));
            }
        }
    }

    #[test]
    fn gate_validation() {
        assert!(matches!(
            Gate::new(GateKind::Cz, &[1, 1], &[]),
            Err(GateError::RepeatedQubit { .. })
        ));
        assert!(matches!(
            Gate::new(GateKind::Rz, &[0], &[]),
            Err(GateError::Params { .. })
        ));
        assert!(matches!(
            Gate::new(GateKind::H, &[0, 1], &[]),
            Err(GateError::Arity { .. })
        ));
        let mut c = Circuit::new(2, "t").unwrap();
        assert!(c.push(Gate::cz(0, 2)).is_err());
        assert!(Circuit::new(0, "empty").is_err());
    }

    #[test]
    fn mnemonics_round_trip() {
        for k in GateKind::ALL {
            assert_eq!(k.mnemonic().parse::<GateKind>(), Ok(k));
        }
        assert_eq!("cnot".parse::<GateKind>(), Ok(GateKind::Cnot));
    }
}
