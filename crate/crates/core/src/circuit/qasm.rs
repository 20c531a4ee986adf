//! OpenQASM 2.0 front end for the supported subset.
//!
//! Accepted: the `OPENQASM 2.0;` header, `include` statements (ignored), a
//! single `qreg`, and applications of `h x y z s sdg t tdg rx ry rz u3 cx cz
//! swap`. Gate arguments may be single qubits (`q[3]`) or the whole register
//! (`q`), in which case the gate is broadcast. Angle expressions support
//! `pi`, numeric literals, `+ - * / ^`, parentheses and the functions
//! `sin cos tan exp ln sqrt`.

use std::f64::consts::PI;

use thiserror::Error;

use super::{Circuit, Gate, GateKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasmError {
    #[error("missing `OPENQASM 2.0;` version header")]
    MissingVersion,
    #[error("{line}:{col}: unsupported construct `{construct}`")]
    Unsupported {
        construct: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(usize),
    Real(f64),
    Str(String),
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, QasmError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, message: String| QasmError::Syntax { line, col, message };

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |i: &mut usize, n: usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(&mut i, 1);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, 1);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(&mut i, 1);
            }
            let ident: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Ident(ident),
                line: tl,
                col: tc,
            });
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            let mut real = false;
            while i < chars.len() {
                let d = chars[i];
                if d.is_ascii_digit() {
                    advance(&mut i, 1);
                } else if d == '.' {
                    real = true;
                    advance(&mut i, 1);
                } else if (d == 'e' || d == 'E')
                    && chars
                        .get(i + 1)
                        .is_some_and(|n| n.is_ascii_digit() || *n == '-' || *n == '+')
                {
                    real = true;
                    advance(&mut i, 2);
                } else {
                    break;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let tok = if real {
                Tok::Real(
                    s.parse()
                        .map_err(|_| err(tl, tc, format!("invalid number `{s}`")))?,
                )
            } else {
                Tok::Int(
                    s.parse()
                        .map_err(|_| err(tl, tc, format!("invalid integer `{s}`")))?,
                )
            };
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
        } else if c == '"' {
            advance(&mut i, 1);
            let start = i;
            while i < chars.len() && chars[i] != '"' {
                advance(&mut i, 1);
            }
            if i >= chars.len() {
                return Err(err(tl, tc, "unterminated string".into()));
            }
            let s: String = chars[start..i].iter().collect();
            advance(&mut i, 1);
            out.push(Token {
                tok: Tok::Str(s),
                line: tl,
                col: tc,
            });
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            advance(&mut i, 2);
            out.push(Token {
                tok: Tok::Arrow,
                line: tl,
                col: tc,
            });
        } else if ";,[](){}+-*/^=<>".contains(c) {
            advance(&mut i, 1);
            out.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                col: tc,
            });
        } else {
            return Err(err(tl, tc, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// One gate operand: a single qubit or the whole register.
enum Operand {
    Qubit(usize),
    Register,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    reg: Option<(String, usize)>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn location(&self) -> (usize, usize) {
        self.peek()
            .or_else(|| self.toks.last())
            .map_or((1, 1), |t| (t.line, t.col))
    }

    fn syntax(&self, message: impl Into<String>) -> QasmError {
        let (line, col) = self.location();
        QasmError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<Token, QasmError> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.syntax("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{c}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<String, QasmError> {
        match self.next()? {
            Token {
                tok: Tok::Ident(s), ..
            } => Ok(s),
            t => Err(QasmError::Syntax {
                line: t.line,
                col: t.col,
                message: "expected identifier".into(),
            }),
        }
    }

    fn expect_int(&mut self) -> Result<usize, QasmError> {
        match self.next()? {
            Token {
                tok: Tok::Int(n), ..
            } => Ok(n),
            t => Err(QasmError::Syntax {
                line: t.line,
                col: t.col,
                message: "expected integer".into(),
            }),
        }
    }

    fn header(&mut self) -> Result<(), QasmError> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) if s == "OPENQASM" => self.pos += 1,
            _ => return Err(QasmError::MissingVersion),
        }
        let version = match self.next()? {
            Token {
                tok: Tok::Real(v), ..
            } => v,
            Token {
                tok: Tok::Int(v), ..
            } => v as f64,
            _ => return Err(QasmError::MissingVersion),
        };
        if version != 2.0 {
            return Err(self.syntax(format!("unsupported OpenQASM version {version}")));
        }
        self.expect_sym(';')
    }

    fn program(mut self) -> Result<Circuit, QasmError> {
        self.header()?;
        let mut gates: Vec<Gate> = Vec::new();

        while let Some(tok) = self.peek().cloned() {
            let (line, col) = (tok.line, tok.col);
            let Tok::Ident(word) = tok.tok else {
                return Err(self.syntax("expected statement"));
            };
            self.pos += 1;
            match word.as_str() {
                "include" => {
                    match self.next()?.tok {
                        Tok::Str(_) => {}
                        _ => return Err(self.syntax("expected file name after `include`")),
                    }
                    self.expect_sym(';')?;
                }
                "qreg" => {
                    if self.reg.is_some() {
                        return Err(QasmError::Unsupported {
                            construct: "second qreg".into(),
                            line,
                            col,
                        });
                    }
                    let name = self.expect_ident()?;
                    self.expect_sym('[')?;
                    let n = self.expect_int()?;
                    self.expect_sym(']')?;
                    self.expect_sym(';')?;
                    if n == 0 {
                        return Err(self.syntax("qreg must have at least one qubit"));
                    }
                    self.reg = Some((name, n));
                }
                "creg" | "measure" | "reset" | "barrier" | "if" | "gate" | "opaque" => {
                    return Err(QasmError::Unsupported {
                        construct: word,
                        line,
                        col,
                    })
                }
                name => {
                    let kind = match name {
                        "h" => GateKind::H,
                        "x" => GateKind::X,
                        "y" => GateKind::Y,
                        "z" => GateKind::Z,
                        "s" => GateKind::S,
                        "sdg" => GateKind::Sdg,
                        "t" => GateKind::T,
                        "tdg" => GateKind::Tdg,
                        "rx" => GateKind::Rx,
                        "ry" => GateKind::Ry,
                        "rz" => GateKind::Rz,
                        "u3" => GateKind::U3,
                        "cx" => GateKind::Cnot,
                        "cz" => GateKind::Cz,
                        "swap" => GateKind::Swap,
                        _ => {
                            return Err(QasmError::Unsupported {
                                construct: format!("gate {name}"),
                                line,
                                col,
                            })
                        }
                    };
                    self.gate_statement(kind, line, col, &mut gates)?;
                }
            }
        }

        let (name, n) = self.reg.ok_or_else(|| QasmError::Syntax {
            line: 1,
            col: 1,
            message: "no qreg declared".into(),
        })?;
        Circuit::from_gates(n, gates, name).map_err(|e| QasmError::Syntax {
            line: 1,
            col: 1,
            message: e.to_string(),
        })
    }

    fn gate_statement(
        &mut self,
        kind: GateKind,
        line: usize,
        col: usize,
        gates: &mut Vec<Gate>,
    ) -> Result<(), QasmError> {
        let mut params = Vec::new();
        if self.eat_sym('(') && !self.eat_sym(')') {
            loop {
                params.push(self.expr()?);
                if self.eat_sym(')') {
                    break;
                }
                self.expect_sym(',')?;
            }
        }
        if params.len() != kind.param_count() {
            return Err(QasmError::Syntax {
                line,
                col,
                message: format!(
                    "{kind} takes {} parameter(s), got {}",
                    kind.param_count(),
                    params.len()
                ),
            });
        }
        let mut operands = vec![self.operand()?];
        while self.eat_sym(',') {
            operands.push(self.operand()?);
        }
        self.expect_sym(';')?;
        if operands.len() != kind.arity() {
            return Err(QasmError::Syntax {
                line,
                col,
                message: format!(
                    "{kind} takes {} qubit argument(s), got {}",
                    kind.arity(),
                    operands.len()
                ),
            });
        }
        let n = self.reg.as_ref().map_or(0, |r| r.1);
        let broadcast = operands.iter().any(|o| matches!(o, Operand::Register));
        let reps = if broadcast { n } else { 1 };
        for k in 0..reps {
            let qubits: Vec<usize> = operands
                .iter()
                .map(|o| match o {
                    Operand::Qubit(q) => *q,
                    Operand::Register => k,
                })
                .collect();
            let g = Gate::new(kind, &qubits, &params).map_err(|e| QasmError::Syntax {
                line,
                col,
                message: e.to_string(),
            })?;
            gates.push(g);
        }
        Ok(())
    }

    fn operand(&mut self) -> Result<Operand, QasmError> {
        let (line, col) = self.location();
        let name = self.expect_ident()?;
        let (reg, n) = self.reg.clone().ok_or_else(|| QasmError::Syntax {
            line,
            col,
            message: "gate before qreg declaration".into(),
        })?;
        if name != reg {
            return Err(QasmError::Syntax {
                line,
                col,
                message: format!("unknown register `{name}`"),
            });
        }
        if self.eat_sym('[') {
            let q = self.expect_int()?;
            self.expect_sym(']')?;
            if q >= n {
                return Err(QasmError::Syntax {
                    line,
                    col,
                    message: format!("index {q} out of range for {reg}[{n}]"),
                });
            }
            Ok(Operand::Qubit(q))
        } else {
            Ok(Operand::Register)
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut v = self.unary()?;
        loop {
            if self.eat_sym('*') {
                v *= self.unary()?;
            } else if self.eat_sym('/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat_sym('^') {
            return Ok(base.powf(self.unary()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, QasmError> {
        let t = self.next()?;
        match t.tok {
            Tok::Int(n) => Ok(n as f64),
            Tok::Real(v) => Ok(v),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Tok::Ident(ref s) if s == "pi" => Ok(PI),
            Tok::Ident(ref s) => {
                let f: fn(f64) -> f64 = match s.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => {
                        return Err(QasmError::Syntax {
                            line: t.line,
                            col: t.col,
                            message: format!("unknown identifier `{s}` in expression"),
                        })
                    }
                };
                self.expect_sym('(')?;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(f(v))
            }
            _ => Err(QasmError::Syntax {
                line: t.line,
                col: t.col,
                message: "expected expression".into(),
            }),
        }
    }
}

pub fn parse_openqasm(text: &str) -> Result<Circuit, QasmError> {
    let toks = lex(text)?;
    Parser {
        toks,
        pos: 0,
        reg: None,
    }
    .program()
}
