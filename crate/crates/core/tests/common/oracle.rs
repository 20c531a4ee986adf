//! Dense-matrix reference simulator, independent of the crate's kernels.
//!
//! Every gate becomes a full `2^N x 2^N` operator, evaluated entry by entry
//! from textbook single- and two-qubit matrices, and multiplied into the
//! state. Only meant for `N <= 10`.

#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use qcsim::{Circuit, Gate, GateKind};

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn single(g: &Gate) -> [[C; 2]; 2] {
    let p = g.params();
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match g.kind() {
        GateKind::I => [[one, z], [z, one]],
        GateKind::X => [[z, one], [one, z]],
        GateKind::Y => [[z, -i], [i, z]],
        GateKind::Z => [[one, z], [z, -one]],
        GateKind::H => {
            let h = c(FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        GateKind::S => [[one, z], [z, i]],
        GateKind::Sdg => [[one, z], [z, -i]],
        GateKind::T => [[one, z], [z, C::from_polar(1.0, FRAC_PI_4)]],
        GateKind::Tdg => [[one, z], [z, C::from_polar(1.0, -FRAC_PI_4)]],
        // sqrt(X) = (1+i)/2 I + (1-i)/2 X
        GateKind::V => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        // sqrt(Y) = (1+i)/2 (I - iY)
        GateKind::Vy => [[c(0.5, 0.5), c(-0.5, -0.5)], [c(0.5, 0.5), c(0.5, 0.5)]],
        GateKind::Rx => {
            let h = p[0] / 2.0;
            [
                [c(h.cos(), 0.0), c(0.0, -h.sin())],
                [c(0.0, -h.sin()), c(h.cos(), 0.0)],
            ]
        }
        GateKind::Ry => {
            let h = p[0] / 2.0;
            [
                [c(h.cos(), 0.0), c(-h.sin(), 0.0)],
                [c(h.sin(), 0.0), c(h.cos(), 0.0)],
            ]
        }
        GateKind::Rz => [[(-i * p[0] / 2.0).exp(), z], [z, (i * p[0] / 2.0).exp()]],
        GateKind::U3 => {
            let (t, f, l) = (p[0] / 2.0, p[1], p[2]);
            [
                [c(t.cos(), 0.0), -(i * l).exp() * t.sin()],
                [(i * f).exp() * t.sin(), (i * (f + l)).exp() * t.cos()],
            ]
        }
        GateKind::Diag1 => [[c(p[0], p[1]), z], [z, c(p[2], p[3])]],
        k => panic!("{k} is not a single-qubit gate"),
    }
}

/// `<out|G|inp>` on the two gate qubits, bits given as `(first, second)`.
fn two(kind: GateKind, out: (bool, bool), inp: (bool, bool)) -> C {
    let hit = |b: bool| if b { c(1.0, 0.0) } else { c(0.0, 0.0) };
    match kind {
        GateKind::Cnot => hit(out == (inp.0, inp.1 ^ inp.0)),
        GateKind::Cz => {
            let sign = if inp.0 && inp.1 { -1.0 } else { 1.0 };
            hit(out == inp) * sign
        }
        GateKind::Swap => hit(out == (inp.1, inp.0)),
        k => panic!("{k} is not a two-qubit gate"),
    }
}

/// Entry `(row, col)` of the gate lifted to the whole register.
fn lifted(g: &Gate, row: usize, col: usize) -> C {
    let qs = g.qubits();
    let mask: usize = qs.iter().map(|&q| 1usize << q).sum();
    if row & !mask != col & !mask {
        return c(0.0, 0.0);
    }
    let bit = |v: usize, q: usize| (v >> q) & 1 == 1;
    match qs {
        [q] => single(g)[usize::from(bit(row, *q))][usize::from(bit(col, *q))],
        [a, b] => two(
            g.kind(),
            (bit(row, *a), bit(row, *b)),
            (bit(col, *a), bit(col, *b)),
        ),
        _ => unreachable!(),
    }
}

/// Final state of `c` applied to `|0...0>` by dense matrix-vector products.
pub fn dense_run(circuit: &Circuit) -> Vec<C> {
    let dim = 1usize << circuit.n_qubits();
    assert!(dim <= 1 << 10, "dense oracle is limited to 10 qubits");
    let mut psi = vec![c(0.0, 0.0); dim];
    psi[0] = c(1.0, 0.0);
    for g in circuit.gates() {
        psi = (0..dim)
            .map(|row| (0..dim).map(|col| lifted(g, row, col) * psi[col]).sum())
            .collect();
    }
    psi
}

pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
