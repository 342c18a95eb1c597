//! Line-oriented circuit text format.
//!
//! ```text
//! # Bell pair with a trainable phase
//! qubits 2
//! H 0
//! CNOT 0 1
//! RZ 1 $0
//! RX 0 0.25
//! ```
//!
//! `qubits N` must precede every op. Each op line is `KIND target [target2]
//! [angle|$slot]` with angles in radians. `#` starts a comment. An optional
//! `params K` line reserves trainable slots beyond the highest `$k` used; it
//! is only emitted by [`render_circuit`] when needed.

use std::fmt::Write as _;

use crate::circuit::{Angle, Circuit, GateKind, GateOp};
use crate::error::{Error, Result};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let body = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &body[s..i],
                    column: body[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_index(tok: &Token<'_>, line: usize, what: &str) -> Result<usize> {
    tok.text
        .parse::<usize>()
        .map_err(|_| parse_err(line, tok.column, format!("expected {what}, found `{}`", tok.text)))
}

fn parse_angle(tok: &Token<'_>, line: usize) -> Result<Angle> {
    if let Some(slot) = tok.text.strip_prefix('$') {
        return slot
            .parse::<usize>()
            .map(Angle::Slot)
            .map_err(|_| parse_err(line, tok.column, format!("bad parameter slot `{}`", tok.text)));
    }
    match tok.text.parse::<f64>() {
        Ok(a) if a.is_finite() => Ok(Angle::Literal(a)),
        _ => Err(parse_err(
            line,
            tok.column,
            format!("expected angle in radians or $slot, found `{}`", tok.text),
        )),
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut num_qubits: Option<usize> = None;
    let mut reserved = 0usize;
    let mut ops = Vec::new();
    let mut max_slot: Option<usize> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = tokenize(raw);
        let Some(head) = toks.first() else { continue };

        match head.text {
            "qubits" | "params" => {
                let arg = toks.get(1).ok_or_else(|| {
                    parse_err(line, head.column + head.text.len(), format!("`{}` needs a count", head.text))
                })?;
                if let Some(extra) = toks.get(2) {
                    return Err(parse_err(line, extra.column, "unexpected token"));
                }
                let n = parse_index(arg, line, "a count")?;
                if head.text == "qubits" {
                    if num_qubits.is_some() {
                        return Err(parse_err(line, head.column, "duplicate `qubits` header"));
                    }
                    if n == 0 {
                        return Err(parse_err(line, arg.column, "circuit needs at least one qubit"));
                    }
                    num_qubits = Some(n);
                } else {
                    reserved = n;
                }
            }
            name => {
                let Some(width) = num_qubits else {
                    return Err(parse_err(line, head.column, "`qubits N` header must come first"));
                };
                let kind = GateKind::from_name(name)
                    .ok_or_else(|| parse_err(line, head.column, format!("unknown gate `{name}`")))?;
                let arity = kind.arity();
                let mut targets = Vec::with_capacity(arity);
                for i in 0..arity {
                    let tok = toks.get(1 + i).ok_or_else(|| {
                        let col = raw.split('#').next().unwrap_or("").trim_end().chars().count() + 1;
                        parse_err(line, col, format!("{name} needs {arity} qubit index(es)"))
                    })?;
                    let q = parse_index(tok, line, "a qubit index")?;
                    if q >= width {
                        return Err(parse_err(
                            line,
                            tok.column,
                            format!("qubit {q} out of range for {width} qubits"),
                        ));
                    }
                    targets.push(q);
                }
                let rest = &toks[1 + arity..];
                let param = if kind.is_parametric() {
                    let tok = rest.first().ok_or_else(|| {
                        let col = raw.split('#').next().unwrap_or("").trim_end().chars().count() + 1;
                        parse_err(line, col, format!("missing angle for {name}"))
                    })?;
                    let a = parse_angle(tok, line)?;
                    if let Angle::Slot(k) = a {
                        max_slot = Some(max_slot.map_or(k, |m| m.max(k)));
                    }
                    if let Some(extra) = rest.get(1) {
                        return Err(parse_err(line, extra.column, "unexpected token"));
                    }
                    Some(a)
                } else {
                    if let Some(extra) = rest.first() {
                        return Err(parse_err(line, extra.column, format!("{name} takes no angle")));
                    }
                    None
                };
                let op = GateOp::new(kind, targets, param)
                    .map_err(|e| parse_err(line, head.column, e.to_string()))?;
                ops.push(op);
            }
        }
    }

    let num_qubits =
        num_qubits.ok_or_else(|| parse_err(last_line.max(1), 1, "missing `qubits N` header"))?;
    let num_params = reserved.max(max_slot.map_or(0, |m| m + 1));
    Circuit::new(num_qubits, ops, num_params)
}

pub fn render_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "qubits {}", circuit.num_qubits()).unwrap();
    let used = circuit
        .ops()
        .iter()
        .filter_map(GateOp::slot)
        .max()
        .map_or(0, |m| m + 1);
    if circuit.num_params() > used {
        writeln!(out, "params {}", circuit.num_params()).unwrap();
    }
    for op in circuit.ops() {
        out.push_str(op.kind.name());
        for q in &op.targets {
            write!(out, " {q}").unwrap();
        }
        match op.param {
            Some(Angle::Literal(a)) => write!(out, " {a}").unwrap(),
            Some(Angle::Slot(k)) => write!(out, " ${k}").unwrap(),
            None => {}
        }
        out.push('\n');
    }
    out
}
