//! Line-oriented circuit and matrix files.
//!
//! A circuit file holds one gate per line, `NAME(params) q…`, for example
//! `H 0`, `CNOT 0 1`, `RZ(pi/2) 2` or `RAW swap.mat 0 1`. Text after `#` is
//! ignored. Raw matrix paths are relative to the circuit file.
//!
//! A matrix file holds one row per line; each entry is `re` or `re,im`.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle::{Circuit, Gate};
use crate::pauli::CMatrix;

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// A number, optionally written with `pi`: `1.5`, `-pi/4`, `3*pi/2`.
pub fn parse_angle(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Ok(v) = text.parse::<f64>() {
        return Some(v);
    }
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, text),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, d.trim().parse::<f64>().ok()?),
        None => (body, 1.0),
    };
    let mut value = 1.0;
    for factor in num.split('*') {
        value *= match factor.trim() {
            "pi" | "PI" | "Pi" => std::f64::consts::PI,
            f => f.parse::<f64>().ok()?,
        };
    }
    Some(sign * value / den)
}

/// Reads a square complex matrix.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<CMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|entry| {
                let mut parts = entry.splitn(2, ',');
                let re = parts.next().and_then(parse_angle);
                let im = parts.next().map_or(Some(0.0), parse_angle);
                match (re, im) {
                    (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                    _ => Err(parse_err(path, i + 1, format!("bad matrix entry {entry:?}"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(parse_err(path, 0, format!("matrix is not square ({dim} rows)")));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

fn parse_gate(path: &Path, line: usize, head: &str, args: &mut Vec<&str>) -> Result<Gate> {
    let (name, param) = match head.split_once('(') {
        Some((n, rest)) => {
            let p = rest
                .strip_suffix(')')
                .ok_or_else(|| parse_err(path, line, format!("unclosed parameter in {head:?}")))?;
            (n, Some(p))
        }
        None => (head, None),
    };
    let name = name.to_ascii_uppercase();
    let angle = || -> Result<f64> {
        let p = param.ok_or_else(|| parse_err(path, line, format!("{name} needs an angle")))?;
        parse_angle(p).ok_or_else(|| parse_err(path, line, format!("bad angle {p:?}")))
    };
    let plain = |g: Gate| -> Result<Gate> {
        match param {
            Some(_) => Err(parse_err(path, line, format!("{name} takes no parameter"))),
            None => Ok(g),
        }
    };
    match name.as_str() {
        "X" => plain(Gate::X),
        "Y" => plain(Gate::Y),
        "Z" => plain(Gate::Z),
        "H" => plain(Gate::H),
        "S" => plain(Gate::S),
        "T" => plain(Gate::T),
        "CNOT" | "CX" => plain(Gate::Cnot),
        "CZ" => plain(Gate::Cz),
        "SWAP" => plain(Gate::Swap),
        "RX" => Ok(Gate::Rx(angle()?)),
        "RY" => Ok(Gate::Ry(angle()?)),
        "RZ" => Ok(Gate::Rz(angle()?)),
        "CPHASE" => Ok(Gate::Cphase(angle()?)),
        "RAW" => {
            if args.is_empty() {
                return Err(parse_err(path, line, "RAW needs a matrix file"));
            }
            let file = args.remove(0);
            let full = path.parent().unwrap_or(Path::new(".")).join(file);
            let m = read_matrix(&full)?;
            Gate::raw(m).map_err(|e| parse_err(path, line, format!("{file}: {e}")))
        }
        other => Err(parse_err(path, line, format!("unknown gate {other:?}"))),
    }
}

/// Parses circuit text; `path` is used for messages and to resolve raw
/// matrix files.
pub fn parse_circuit_str(text: &str, path: &Path, num_qubits: usize) -> Result<Circuit> {
    let mut circuit = Circuit::new(num_qubits);
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words: Vec<&str> = content.split_whitespace().collect();
        let head = words.remove(0);
        let gate = parse_gate(path, line, head, &mut words)?;
        let targets = words
            .iter()
            .map(|w| {
                w.parse::<usize>()
                    .map_err(|_| parse_err(path, line, format!("bad qubit index {w:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if targets.len() != gate.arity() {
            return Err(parse_err(
                path,
                line,
                format!("{} acts on {} qubits, got {}", gate.name(), gate.arity(), targets.len()),
            ));
        }
        circuit
            .push(gate, &targets)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
    }
    Ok(circuit)
}

pub fn parse_circuit(path: impl AsRef<Path>, num_qubits: usize) -> Result<Circuit> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_circuit_str(&text, path, num_qubits)
}
