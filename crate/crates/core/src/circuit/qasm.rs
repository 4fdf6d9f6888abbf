//! OpenQASM 3 text for the native gate set.
//!
//! Raw single-qubit matrices are written through the `rz·sx·rz·sx·rz`
//! decomposition; raw two-qubit matrices have no textual form.

use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

const ECR_DEFINITION: &str = "gate ecr a, b { h b; cx a, b; rz(pi/2) b; cx a, b; h b; x a; }";

/// Native-gate sequence equal to the 2×2 unitary `m` up to global phase.
pub fn decompose_u1q(q: usize, m: &ComplexMatrix) -> Vec<Gate> {
    let e = m.entries();
    let (m00, m01, m10, m11) = (e[0], e[1], e[2], e[3]);
    let theta = 2.0 * m10.norm().atan2(m00.norm());
    let (phi, lambda) = if m10.norm() < 1e-12 {
        (0.0, m11.arg() - m00.arg())
    } else if m00.norm() < 1e-12 {
        (m10.arg() - (-m01).arg(), 0.0)
    } else {
        (m10.arg() - m00.arg(), (-m01).arg() - m00.arg())
    };
    // U(θ, φ, λ) ≅ RZ(φ+π)·SX·RZ(θ+π)·SX·RZ(λ)
    [
        Gate::rz(q, lambda),
        Gate::sx(q),
        Gate::rz(q, theta + PI),
        Gate::sx(q),
        Gate::rz(q, phi + PI),
    ]
    .into_iter()
    .filter(|g| !matches!(g.kind(), GateKind::RZ(a) if a.abs() < 1e-15))
    .collect()
}

fn write_gate(out: &mut String, g: &Gate) -> Result<()> {
    let q = g.qubits();
    match g.kind() {
        GateKind::RZ(phi) => writeln!(out, "rz({phi}) q[{}];", q[0]),
        GateKind::U1Q(m) => {
            for h in decompose_u1q(q[0], m) {
                write_gate(out, &h)?;
            }
            Ok(())
        }
        GateKind::U2Q(_) => return Err(Error::UnsupportedGate("raw two-qubit matrix".into())),
        k if k.arity() == 1 => writeln!(out, "{} q[{}];", k.qasm_name().unwrap(), q[0]),
        k => writeln!(out, "{} q[{}],q[{}];", k.qasm_name().unwrap(), q[0], q[1]),
    }
    .expect("writing to a String");
    Ok(())
}

/// OpenQASM 3 program for `c`, gates in circuit order followed by one
/// measurement per measured qubit.
pub fn emit_qasm(c: &Circuit) -> Result<String> {
    let w = c.n_qubits();
    let mut out = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n");
    if c.ops().iter().any(|g| *g.kind() == GateKind::ECR) {
        out.push_str(ECR_DEFINITION);
        out.push('\n');
    }
    writeln!(out, "qubit[{w}] q;").unwrap();
    writeln!(out, "bit[{w}] c;").unwrap();
    for g in c.ops() {
        write_gate(&mut out, g)?;
    }
    for &q in c.measured() {
        writeln!(out, "c[{q}] = measure q[{q}];").unwrap();
    }
    Ok(out)
}

fn parse_angle(s: &str, line: usize) -> Result<f64> {
    let err = || Error::QasmParse {
        line,
        msg: format!("bad angle `{s}`"),
    };
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    // Forms like `pi`, `-pi/2`, `3*pi/4`.
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, s),
    };
    let (num, den) = match body.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().map_err(|_| err())?),
        None => (body, 1.0),
    };
    let coeff = match num.split_once('*') {
        Some((k, "pi")) => k.trim().parse::<f64>().map_err(|_| err())?,
        None if num == "pi" => 1.0,
        _ => return Err(err()),
    };
    Ok(sign * coeff * PI / den)
}

fn parse_qubit(s: &str, line: usize) -> Result<usize> {
    s.trim()
        .strip_prefix("q[")
        .and_then(|r| r.strip_suffix(']'))
        .and_then(|i| i.parse().ok())
        .ok_or_else(|| Error::QasmParse {
            line,
            msg: format!("bad qubit operand `{s}`"),
        })
}

fn parse_register(s: &str, prefix: &str) -> Option<usize> {
    s.strip_prefix(prefix)?.split_once(']')?.0.parse().ok()
}

/// Reads programs in the form produced by [`emit_qasm`].
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    let mut in_gate_def = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stmt = raw.split("//").next().unwrap_or("").trim();
        if in_gate_def {
            in_gate_def = !stmt.contains('}');
            continue;
        }
        if stmt.is_empty() || stmt.starts_with("OPENQASM") || stmt.starts_with("include") {
            continue;
        }
        if stmt.starts_with("gate ") {
            in_gate_def = !stmt.contains('}');
            continue;
        }
        let err = |msg: String| Error::QasmParse { line, msg };
        let stmt = stmt
            .strip_suffix(';')
            .ok_or_else(|| err("missing `;`".into()))?
            .trim();
        if let Some(n) = parse_register(stmt, "qubit[") {
            circuit = Some(Circuit::new(n));
            continue;
        }
        if stmt.starts_with("bit[") {
            continue;
        }
        let c = circuit
            .as_mut()
            .ok_or_else(|| err("statement before qubit declaration".into()))?;
        if let Some((_, rhs)) = stmt.split_once("= measure") {
            c.measure(parse_qubit(rhs, line)?)?;
            continue;
        }
        let (head, operands) = stmt
            .split_once(|ch: char| ch.is_whitespace())
            .ok_or_else(|| err(format!("cannot parse `{stmt}`")))?;
        let qubits = operands
            .split(',')
            .map(|s| parse_qubit(s, line))
            .collect::<Result<Vec<_>>>()?;
        let kind = match head.split_once('(') {
            Some(("rz", arg)) => {
                let arg = arg.strip_suffix(')').ok_or_else(|| err("unclosed `(`".into()))?;
                GateKind::RZ(parse_angle(arg, line)?)
            }
            Some((name, _)) => return Err(Error::UnsupportedGate(name.to_string())),
            None => match head {
                "x" => GateKind::X,
                "sx" => GateKind::SX,
                "h" => GateKind::H,
                "cx" => GateKind::CNOT,
                "ecr" => GateKind::ECR,
                other => return Err(Error::UnsupportedGate(other.to_string())),
            },
        };
        c.push(Gate::new(kind, qubits).map_err(|e| err(e.to_string()))?)?;
    }
    circuit.ok_or(Error::QasmParse {
        line: 0,
        msg: "no qubit declaration".into(),
    })
}
