use super::Circuit;

/// Greedy as-soon-as-possible layering of a circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSchedule {
    /// Gate indices per layer, in circuit order.
    pub layers: Vec<Vec<usize>>,
    pub depth: usize,
}

/// Each gate goes into the layer right after the last layer that touches any
/// of its qubits.
pub fn compute_depth(c: &Circuit) -> LayerSchedule {
    let mut next_free = vec![0usize; c.n_qubits()];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for (i, g) in c.gates().iter().enumerate() {
        let layer = g.qubits().iter().map(|&q| next_free[q]).max().unwrap_or(0);
        if layer == layers.len() {
            layers.push(Vec::new());
        }
        layers[layer].push(i);
        for &q in g.qubits() {
            next_free[q] = layer + 1;
        }
    }
    let depth = layers.len();
    LayerSchedule { layers, depth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gen_ghz_chain, gen_uniform_superposition, Gate};

    #[test]
    fn superposition_is_one_layer() {
        assert_eq!(
            compute_depth(&gen_uniform_superposition(8).unwrap()).depth,
            1
        );
    }

    #[test]
    fn ghz_chain_is_sequential() {
        let s = compute_depth(&gen_ghz_chain(4).unwrap());
        assert_eq!(s.depth, 4);
        assert!(s.layers.iter().all(|l| l.len() == 1));
    }

    #[test]
    fn hand_layering() {
        let c = Circuit::from_gates(
            2,
            vec![Gate::h(0), Gate::h(1), Gate::cz(0, 1), Gate::h(0)],
            "t",
        )
        .unwrap();
        let s = compute_depth(&c);
        assert_eq!(s.depth, 3);
        assert_eq!(s.layers, vec![vec![0, 1], vec![2], vec![3]]);
    }

    #[test]
    fn empty_circuit_has_depth_zero() {
        let c = Circuit::new(3, "empty").unwrap();
        assert_eq!(compute_depth(&c).depth, 0);
    }

    #[test]
    fn layers_never_share_qubits() {
        let c = crate::circuit::random_gate_sequence(6, 200, 3);
        for layer in compute_depth(&c).layers {
            let mut seen = [false; 6];
            for i in layer {
                for &q in c.gates()[i].qubits() {
                    assert!(!seen[q]);
                    seen[q] = true;
                }
            }
        }
    }

    #[test]
    fn appending_a_gate_over_the_deepest_qubits_adds_one_layer() {
        let mut c = gen_ghz_chain(3).unwrap();
        let before = compute_depth(&c).depth;
        c.push(Gate::cz(1, 2)).unwrap();
        assert_eq!(compute_depth(&c).depth, before + 1);
    }
}
