use super::{Circuit, Gate, GateKind};

fn push_cnot(out: &mut Vec<Gate>, control: usize, target: usize) {
    out.push(Gate::h(target));
    out.push(Gate::cz(control, target));
    out.push(Gate::h(target));
}

/// Rewrites every entangling gate into single-qubit gates plus CZ.
///
/// `CNOT(a,b)` becomes `H(b) CZ(a,b) H(b)`; `SWAP(a,b)` becomes
/// `CNOT(a,b) CNOT(b,a) CNOT(a,b)`, each rewritten in turn. Other gates pass
/// through unchanged.
pub fn rewrite_to_cz_basis(c: &Circuit) -> Circuit {
    let mut out = Vec::with_capacity(c.len());
    for g in c.gates() {
        match g.kind() {
            GateKind::Cnot => push_cnot(&mut out, g.qubits()[0], g.qubits()[1]),
            GateKind::Swap => {
                let (a, b) = (g.qubits()[0], g.qubits()[1]);
                push_cnot(&mut out, a, b);
                push_cnot(&mut out, b, a);
                push_cnot(&mut out, a, b);
            }
            _ => out.push(g.clone()),
        }
    }
    Circuit::from_gates(c.n_qubits(), out, c.name()).expect("qubits unchanged")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gen_ghz_chain, gen_uniform_superposition};

    #[test]
    fn cnot_identity() {
        let c = Circuit::from_gates(2, vec![Gate::cnot(0, 1)], "c").unwrap();
        assert_eq!(
            rewrite_to_cz_basis(&c).gates(),
            &[Gate::h(1), Gate::cz(0, 1), Gate::h(1)]
        );
    }

    #[test]
    fn ghz3() {
        let r = rewrite_to_cz_basis(&gen_ghz_chain(3).unwrap());
        assert_eq!(
            r.gates(),
            &[
                Gate::h(0),
                Gate::h(1),
                Gate::cz(0, 1),
                Gate::h(1),
                Gate::h(2),
                Gate::cz(1, 2),
                Gate::h(2)
            ]
        );
    }

    #[test]
    fn no_entanglers_unchanged() {
        let c = gen_uniform_superposition(4).unwrap();
        assert_eq!(rewrite_to_cz_basis(&c), c);
    }

    #[test]
    fn swap_expands_to_nine_gates() {
        let c = Circuit::from_gates(2, vec![Gate::swap(0, 1)], "s").unwrap();
        let r = rewrite_to_cz_basis(&c);
        assert_eq!(r.len(), 9);
        assert_eq!(r.count_kind(GateKind::Cz), 3);
    }
}
