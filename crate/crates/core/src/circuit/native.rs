//! Native instruction-stream format.
//!
//! ```text
//! # comment
//! qubits 3
//! H 0
//! CNOT 0 1
//! RZ 2 1.0000000000000001E-1
//! ```
//!
//! The header `qubits N` must precede every gate line. A gate line is a
//! mnemonic followed by its qubit indices and then its angles (radians).
//! `DIAG1 q re0 im0 re1 im1` carries the two complex diagonal entries of a
//! general diagonal operator.

use thiserror::Error;

use super::{Circuit, Gate, GateError, GateKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: qubit index {qubit} out of range for {n_qubits} qubit(s)")]
    QubitOutOfRange {
        line: usize,
        qubit: usize,
        n_qubits: usize,
    },
    #[error("line {line}: unknown mnemonic `{mnemonic}`")]
    UnknownMnemonic { line: usize, mnemonic: String },
    #[error("missing `qubits N` header")]
    MissingHeader,
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut circuit: Option<Circuit> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let head = tokens.next().expect("non-empty line has a token");

        if head.eq_ignore_ascii_case("qubits") {
            if circuit.is_some() {
                return Err(syntax(line, "duplicate `qubits` header"));
            }
            let n = tokens
                .next()
                .ok_or_else(|| syntax(line, "`qubits` needs a count"))?;
            let n: usize = n
                .parse()
                .map_err(|_| syntax(line, format!("invalid qubit count `{n}`")))?;
            if tokens.next().is_some() {
                return Err(syntax(line, "trailing tokens after qubit count"));
            }
            circuit = Some(Circuit::new(n, "circuit").map_err(|e| syntax(line, e.to_string()))?);
            continue;
        }

        let kind: GateKind = head.parse().map_err(|_| ParseError::UnknownMnemonic {
            line,
            mnemonic: head.to_string(),
        })?;
        let c = circuit.as_mut().ok_or(ParseError::MissingHeader)?;
        let n_qubits = c.n_qubits();

        let args: Vec<&str> = tokens.collect();
        let expected = kind.arity() + kind.param_count();
        if args.len() != expected {
            return Err(syntax(
                line,
                format!(
                    "{kind} expects {} qubit(s) and {} angle(s), got {} operand(s)",
                    kind.arity(),
                    kind.param_count(),
                    args.len()
                ),
            ));
        }
        let (qs, ps) = args.split_at(kind.arity());
        let mut qubits = Vec::with_capacity(qs.len());
        for q in qs {
            let q: usize = q
                .parse()
                .map_err(|_| syntax(line, format!("invalid qubit index `{q}`")))?;
            if q >= n_qubits {
                return Err(ParseError::QubitOutOfRange {
                    line,
                    qubit: q,
                    n_qubits,
                });
            }
            qubits.push(q);
        }
        let mut params = Vec::with_capacity(ps.len());
        for p in ps {
            let v: f64 = p
                .parse()
                .map_err(|_| syntax(line, format!("invalid angle `{p}`")))?;
            if !v.is_finite() {
                return Err(syntax(line, format!("non-finite angle `{p}`")));
            }
            params.push(v);
        }
        let gate = Gate::new(kind, &qubits, &params)
            .map_err(|e: GateError| syntax(line, e.to_string()))?;
        c.push(gate).map_err(|e| syntax(line, e.to_string()))?;
    }

    circuit.ok_or(ParseError::MissingHeader)
}

/// Prints `c` in the native format. Angles carry 17 significant digits, so
/// `parse_circuit(&emit_circuit(c))` reproduces every gate exactly.
pub fn emit_circuit(c: &Circuit) -> String {
    let mut lines = Vec::with_capacity(c.len() + 1);
    lines.push(format!("qubits {}", c.n_qubits()));
    lines.extend(c.gates().iter().map(Gate::to_string));
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_gate_program() {
        let c = parse_circuit("qubits 1\nH 0").unwrap();
        assert_eq!(c.n_qubits(), 1);
        assert_eq!(c.gates(), &[Gate::h(0)]);
    }

    #[test]
    fn ghz_chain_program() {
        let c = parse_circuit("qubits 3\nH 0\nCNOT 0 1\nCNOT 1 2").unwrap();
        assert_eq!(c.gates(), &[Gate::h(0), Gate::cnot(0, 1), Gate::cnot(1, 2)]);
    }

    #[test]
    fn comments_and_blank_lines() {
        let c =
            parse_circuit("# header\n\nqubits 2 # two\n  h 1  # lower case\n\nCZ 0 1\n").unwrap();
        assert_eq!(c.gates(), &[Gate::h(1), Gate::cz(0, 1)]);
    }

    #[test]
    fn out_of_range_qubit() {
        assert_eq!(
            parse_circuit("qubits 2\nCZ 0 2"),
            Err(ParseError::QubitOutOfRange {
                line: 2,
                qubit: 2,
                n_qubits: 2
            })
        );
    }

    #[test]
    fn errors() {
        assert_eq!(parse_circuit("H 0"), Err(ParseError::MissingHeader));
        assert_eq!(parse_circuit("# nothing"), Err(ParseError::MissingHeader));
        assert!(matches!(
            parse_circuit("qubits 2\nFOO 0"),
            Err(ParseError::UnknownMnemonic { line: 2, .. })
        ));
        assert!(matches!(
            parse_circuit("qubits 2\nRZ 0"),
            Err(ParseError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_circuit("qubits 2\nCNOT 1 1"),
            Err(ParseError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_circuit("qubits 2\nRX 0 abc"),
            Err(ParseError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_circuit("qubits 2\nqubits 3"),
            Err(ParseError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn emit_canonical() {
        let c = Circuit::from_gates(
            3,
            vec![Gate::h(0), Gate::cnot(0, 1), Gate::cnot(1, 2)],
            "ghz",
        )
        .unwrap();
        assert_eq!(emit_circuit(&c), "qubits 3\nH 0\nCNOT 0 1\nCNOT 1 2");
    }

    #[test]
    fn emit_full_precision_angle() {
        let c = Circuit::from_gates(1, vec![Gate::rz(0, 0.1)], "rz").unwrap();
        let text = emit_circuit(&c);
        assert!(text.contains("RZ 0 1.0000000000000001E-1"), "{text}");
        assert!(parse_circuit(&text).unwrap().same_gates(&c));
    }
}
