//! Gate set and circuit IR.
//!
//! Qubit ordering is little-endian: qubit `q` is bit `q` of a basis-state
//! index. A two-qubit gate matrix is laid out with its first listed qubit as
//! the first (most significant) tensor factor, i.e. local index
//! `2·b(first) + b(second)`.

mod builders;
pub mod qasm;
mod scheme;

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{c, cis, is_unitary, ComplexMatrix};

pub use builders::{
    build_entangler, build_entangler_rooted, build_measurement, build_measurement_rooted,
    cnot_via_ecr, derive_pauli_corrections, CorrectionTarget,
};
pub use scheme::{
    assemble_partial_scheme, assemble_scheme, collapse_processed_unitary, black_box_pair, Example, Hypothesis,
    MeasurementKind, Primitive, Processing, SchemeSpec, UnitarySpec, NamedGate, MAX_WIDTH,
};

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    X,
    SX,
    RZ(f64),
    H,
    CNOT,
    ECR,
    U1Q(ComplexMatrix),
    U2Q(ComplexMatrix),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::X | GateKind::SX | GateKind::RZ(_) | GateKind::H | GateKind::U1Q(_) => 1,
            GateKind::CNOT | GateKind::ECR | GateKind::U2Q(_) => 2,
        }
    }

    /// OpenQASM name, if the gate has one.
    pub fn qasm_name(&self) -> Option<&'static str> {
        match self {
            GateKind::X => Some("x"),
            GateKind::SX => Some("sx"),
            GateKind::RZ(_) => Some("rz"),
            GateKind::H => Some("h"),
            GateKind::CNOT => Some("cx"),
            GateKind::ECR => Some("ecr"),
            GateKind::U1Q(_) | GateKind::U2Q(_) => None,
        }
    }

    /// Pulse-driven rotations about the X axis.
    pub fn is_x_pulse(&self) -> bool {
        matches!(self, GateKind::X | GateKind::SX)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::RZ(phi) => write!(f, "rz({phi})"),
            GateKind::U1Q(_) => write!(f, "u1q"),
            GateKind::U2Q(_) => write!(f, "u2q"),
            other => write!(f, "{}", other.qasm_name().unwrap_or("?")),
        }
    }
}

/// A gate placed on concrete qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    kind: GateKind,
    qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{kind} takes {} qubit(s), got {}",
                kind.arity(),
                qubits.len()
            )));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::InvalidGate(format!("{kind} on repeated qubit {}", qubits[0])));
        }
        match &kind {
            GateKind::RZ(phi) if !phi.is_finite() => {
                return Err(Error::InvalidGate("non-finite rotation angle".into()))
            }
            GateKind::U1Q(m) | GateKind::U2Q(m) => {
                let dim = 1 << qubits.len();
                if m.rows() != dim || m.cols() != dim || !is_unitary(m, 1e-10)? {
                    return Err(Error::InvalidGate("raw matrix is not a unitary of matching size".into()));
                }
            }
            _ => {}
        }
        Ok(Self { kind, qubits })
    }

    pub fn x(q: usize) -> Self {
        Self { kind: GateKind::X, qubits: vec![q] }
    }

    pub fn sx(q: usize) -> Self {
        Self { kind: GateKind::SX, qubits: vec![q] }
    }

    pub fn h(q: usize) -> Self {
        Self { kind: GateKind::H, qubits: vec![q] }
    }

    pub fn rz(q: usize, phi: f64) -> Self {
        Self { kind: GateKind::RZ(phi), qubits: vec![q] }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        assert_ne!(control, target);
        Self { kind: GateKind::CNOT, qubits: vec![control, target] }
    }

    pub fn ecr(first: usize, second: usize) -> Self {
        assert_ne!(first, second);
        Self { kind: GateKind::ECR, qubits: vec![first, second] }
    }

    pub fn u1q(q: usize, m: ComplexMatrix) -> Result<Self> {
        Self::new(GateKind::U1Q(m), vec![q])
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn matrix(&self) -> ComplexMatrix {
        gate_matrix(&self.kind)
    }

    /// Gates whose product (in time order) inverts `self`.
    pub fn inverse(&self) -> Vec<Gate> {
        let q = &self.qubits;
        match &self.kind {
            GateKind::X | GateKind::H | GateKind::CNOT | GateKind::ECR => vec![self.clone()],
            // SX⁻¹ = SX³ = X·SX
            GateKind::SX => vec![Gate::x(q[0]), Gate::sx(q[0])],
            GateKind::RZ(phi) => vec![Gate::rz(q[0], -phi)],
            GateKind::U1Q(m) => vec![Gate { kind: GateKind::U1Q(m.adjoint()), qubits: q.clone() }],
            GateKind::U2Q(m) => vec![Gate { kind: GateKind::U2Q(m.adjoint()), qubits: q.clone() }],
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}", self.kind, self.qubits)
    }
}

pub fn rz_matrix(phi: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[cis(-phi / 2.0), cis(phi / 2.0)])
}

pub fn sx_matrix() -> ComplexMatrix {
    ComplexMatrix::from_2x2(c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5))
}

pub fn x_matrix() -> ComplexMatrix {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    ComplexMatrix::from_2x2(z, o, o, z)
}

/// `exp(−iφX/2)`.
pub fn rx_matrix(phi: f64) -> ComplexMatrix {
    let (co, si) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    ComplexMatrix::from_2x2(c(co, 0.0), c(0.0, -si), c(0.0, -si), c(co, 0.0))
}

/// Exact matrix of a gate kind.
pub fn gate_matrix(kind: &GateKind) -> ComplexMatrix {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    match kind {
        GateKind::X => x_matrix(),
        GateKind::SX => sx_matrix(),
        GateKind::RZ(phi) => rz_matrix(*phi),
        GateKind::H => {
            let s = c(FRAC_1_SQRT_2, 0.0);
            ComplexMatrix::from_2x2(s, s, s, -s)
        }
        GateKind::CNOT => ComplexMatrix::new(
            4,
            4,
            vec![o, z, z, z, z, o, z, z, z, z, z, o, z, z, o, z],
        ),
        GateKind::ECR => {
            // (X⊗I − Y⊗X)/√2
            let s = FRAC_1_SQRT_2;
            let (p, m) = (c(s, 0.0), c(0.0, s));
            ComplexMatrix::new(
                4,
                4,
                vec![z, z, p, m, z, z, m, p, p, -m, z, z, -m, p, z, z],
            )
        }
        GateKind::U1Q(m) | GateKind::U2Q(m) => m.clone(),
    }
}

/// Ordered gate list on `n_qubits` wires plus the set of measured qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<Gate>,
    measured: Vec<usize>,
    ghz_phase: Option<f64>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
            measured: Vec::new(),
            ghz_phase: None,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[Gate] {
        &self.ops
    }

    pub fn measured(&self) -> &[usize] {
        &self.measured
    }

    /// For entangler circuits: relative phase γ of the prepared
    /// `(|0…0⟩ + e^{iγ}|1…1⟩)/√2`.
    pub fn ghz_phase(&self) -> Option<f64> {
        self.ghz_phase
    }

    pub(crate) fn set_ghz_phase(&mut self, gamma: Option<f64>) {
        self.ghz_phase = gamma;
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::InvalidGate(format!(
                "{} touches qubit {q} of a {}-qubit circuit",
                gate.kind, self.n_qubits
            )));
        }
        self.ops.push(gate);
        Ok(self)
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<&mut Self> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    /// Appends all gates of `other`, which must not be wider.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        self.extend(other.ops.iter().cloned())
    }

    pub fn measure(&mut self, q: usize) -> Result<&mut Self> {
        if q >= self.n_qubits {
            return Err(Error::InvalidGate(format!("measure on qubit {q} out of range")));
        }
        if let Err(pos) = self.measured.binary_search(&q) {
            self.measured.insert(pos, q);
        }
        Ok(self)
    }

    pub fn measure_all(&mut self) -> &mut Self {
        self.measured = (0..self.n_qubits).collect();
        self
    }

    /// Gate-reversed circuit with every gate inverted; measurements dropped.
    pub fn inverse(&self) -> Circuit {
        let mut out = Circuit::new(self.n_qubits);
        for g in self.ops.iter().rev() {
            out.ops.extend(g.inverse());
        }
        out
    }

    pub fn count_two_qubit(&self) -> usize {
        self.ops.iter().filter(|g| g.qubits.len() == 2).count()
    }

    pub fn uses_raw_matrices(&self) -> bool {
        self.ops.iter().any(|g| g.kind.qasm_name().is_none())
    }
}

/// `RZ(φ)` written as a named gate, with φ reduced into `(−2π, 2π)`.
pub(crate) fn rz_reduced(q: usize, phi: f64) -> Option<Gate> {
    let p = phi % (4.0 * PI);
    (p.abs() > 1e-15).then(|| Gate::rz(q, p))
}
