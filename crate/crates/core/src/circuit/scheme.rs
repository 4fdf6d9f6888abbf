//! Rectangular discrimination schemes: `N = w·d` black-box uses laid out
//! as `d` sequential layers of `w` parallel uses, with optional processing
//! unitaries between layers.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::builders::{build_entangler_rooted, build_measurement_rooted};
use super::{gate_matrix, rz_reduced, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::linalg::{c, eigen_unitary, wrap_phase, ComplexMatrix, C64};
use crate::simulator::run_statevector;
use crate::theory::UnitaryPair;

/// Simulator cap on scheme width.
pub const MAX_WIDTH: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Primitive {
    #[default]
    Cnot,
    Ecr,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementKind {
    #[default]
    Short,
    Xor,
    Parity,
}

/// Which black box is hidden: `H0` is `U`, `H1` is `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    pub const BOTH: [Hypothesis; 2] = [Hypothesis::H0, Hypothesis::H1];

    pub fn index(self) -> usize {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }
}

/// A single-qubit gate by name: `x`, `sx`, `h`, or `rz` with an angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedGate {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

impl NamedGate {
    fn kind(&self) -> Result<GateKind> {
        match (self.name.to_ascii_lowercase().as_str(), self.angle) {
            ("x", None) => Ok(GateKind::X),
            ("sx", None) => Ok(GateKind::SX),
            ("h", None) => Ok(GateKind::H),
            ("rz", Some(a)) if a.is_finite() => Ok(GateKind::RZ(a)),
            ("rz", _) => Err(Error::InvalidSpec("rz needs a finite angle".into())),
            (other, _) => Err(Error::InvalidSpec(format!("unknown single-qubit gate `{other}`"))),
        }
    }
}

/// A qubit unitary, either as a time-ordered gate sequence or as explicit
/// entries `[[re, im]; 4]` in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitarySpec {
    Gates { gates: Vec<NamedGate> },
    Matrix { matrix: [[f64; 2]; 4] },
}

impl UnitarySpec {
    fn gates_on(&self, q: usize) -> Result<Vec<Gate>> {
        match self {
            UnitarySpec::Gates { gates } => gates
                .iter()
                .map(|g| Gate::new(g.kind()?, vec![q]))
                .collect(),
            UnitarySpec::Matrix { .. } => Ok(vec![Gate::u1q(q, self.matrix()?)?]),
        }
    }

    pub fn matrix(&self) -> Result<ComplexMatrix> {
        match self {
            UnitarySpec::Gates { gates } => gates.iter().try_fold(ComplexMatrix::identity(2), |acc, g| {
                Ok(gate_matrix(&g.kind()?).matmul(&acc))
            }),
            UnitarySpec::Matrix { matrix } => {
                let e: Vec<C64> = matrix.iter().map(|[re, im]| c(*re, *im)).collect();
                let m = ComplexMatrix::new(2, 2, e);
                if !crate::linalg::is_unitary(&m, crate::theory::PAIR_TOL)? {
                    return Err(Error::NotUnitary);
                }
                Ok(m)
            }
        }
    }
}

/// Mid-circuit processing for custom pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Processing {
    /// `X_i = (V†)^⊗w`, which restores the full arc.
    #[default]
    Adjoint,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Example {
    /// Identity versus `RZ(π/N)`, no processing.
    Example1,
    /// `√X·RZ(∓π/2N)·√X` with `X^⊗w` processing.
    Example2,
    Custom {
        u: UnitarySpec,
        v: UnitarySpec,
        #[serde(default)]
        processing: Processing,
    },
}

impl Example {
    /// Per-qubit gate sequence of the black box under `hyp`.
    fn channel_gates(&self, n_copies: usize, hyp: Hypothesis, q: usize) -> Result<Vec<Gate>> {
        let a = PI / (2.0 * n_copies as f64);
        Ok(match (self, hyp) {
            (Example::Example1, Hypothesis::H0) => vec![],
            (Example::Example1, Hypothesis::H1) => vec![Gate::rz(q, PI / n_copies as f64)],
            (Example::Example2, h) => {
                let sign = if h == Hypothesis::H0 { -1.0 } else { 1.0 };
                vec![Gate::sx(q), Gate::rz(q, sign * a), Gate::sx(q)]
            }
            (Example::Custom { u, .. }, Hypothesis::H0) => u.gates_on(q)?,
            (Example::Custom { v, .. }, Hypothesis::H1) => v.gates_on(q)?,
        })
    }
}

/// The qubit unitaries `(U, V)` hidden in the black box.
pub fn black_box_pair(example: &Example, n_copies: usize) -> Result<UnitaryPair> {
    let product = |hyp| -> Result<ComplexMatrix> {
        example
            .channel_gates(n_copies.max(1), hyp, 0)?
            .iter()
            .try_fold(ComplexMatrix::identity(2), |acc, g| Ok(g.matrix().matmul(&acc)))
    };
    UnitaryPair::new(product(Hypothesis::H0)?, product(Hypothesis::H1)?)
}

fn default_root() -> usize {
    0
}

/// Rectangular scheme descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub example: Example,
    pub n_copies: usize,
    pub width: usize,
    pub depth: usize,
    #[serde(default)]
    pub primitive: Primitive,
    #[serde(default)]
    pub measurement: MeasurementKind,
    /// Argument of the unit scalar λ in `(|0…0⟩ + λ|1…1⟩)/√2`; Example 1 only.
    #[serde(default)]
    pub lambda_phase: f64,
    /// Qubit the GHZ cascade starts from.
    #[serde(default = "default_root")]
    pub root: usize,
}

impl SchemeSpec {
    pub fn new(example: Example, n_copies: usize, width: usize, depth: usize) -> Self {
        Self {
            example,
            n_copies,
            width,
            depth,
            primitive: Primitive::Cnot,
            measurement: MeasurementKind::Short,
            lambda_phase: 0.0,
            root: 0,
        }
    }

    pub fn with_primitive(mut self, p: Primitive) -> Self {
        self.primitive = p;
        self
    }

    pub fn with_measurement(mut self, m: MeasurementKind) -> Self {
        self.measurement = m;
        self
    }

    pub fn with_root(mut self, root: usize) -> Self {
        self.root = root;
        self
    }

    pub fn with_lambda_phase(mut self, phase: f64) -> Self {
        self.lambda_phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_layout(true)
    }

    fn validate_layout(&self, exact: bool) -> Result<()> {
        let (w, d, n) = (self.width, self.depth, self.n_copies);
        if w == 0 || d == 0 {
            return Err(Error::InvalidSpec("width and depth must be positive".into()));
        }
        if (exact && w * d != n) || w * d > n {
            return Err(Error::InvalidSpec(format!("w·d = {w}·{d} ≠ N = {n}")));
        }
        if w > MAX_WIDTH {
            return Err(Error::InvalidSpec(format!("width {w} exceeds {MAX_WIDTH}")));
        }
        if self.root >= w {
            return Err(Error::InvalidSpec(format!("root {} is not below width {w}", self.root)));
        }
        if !self.lambda_phase.is_finite() {
            return Err(Error::InvalidSpec("λ phase must be finite".into()));
        }
        if self.measurement == MeasurementKind::Parity && self.example != Example::Example2 {
            return Err(Error::InvalidSpec("parity measurement is defined for Example 2 only".into()));
        }
        Ok(())
    }

    fn lambda_phase_effective(&self) -> f64 {
        match self.example {
            Example::Example1 => self.lambda_phase,
            _ => 0.0,
        }
    }
}

// Everything a custom pair needs beyond the gate layers.
struct CustomFrame {
    // Eigenbasis of the per-qubit relative unitary; None when diagonal.
    basis: Option<ComplexMatrix>,
    // Post-processing gates per qubit that undo the V-branch.
    post: Vec<Gate>,
}

fn custom_frame(spec: &SchemeSpec, v: &UnitarySpec, processing: Processing) -> Result<CustomFrame> {
    let pair = black_box_pair(&spec.example, spec.n_copies)?;
    let d = spec.depth as u32;
    let v_total = match processing {
        Processing::Adjoint => pair.v().clone(),
        Processing::Identity => pair.v().pow(d),
    };
    let u_total = match processing {
        Processing::Adjoint => pair.relative().pow(d),
        Processing::Identity => pair.u().pow(d),
    };
    let u_total = match processing {
        Processing::Adjoint => pair.v().matmul(&u_total),
        Processing::Identity => u_total,
    };
    let relative = v_total.adjoint().matmul(&u_total);
    let eig = eigen_unitary(&relative, 1e-9)?;
    let mut w = ComplexMatrix::zeros(2, 2);
    for (col, vec) in eig.vectors.iter().enumerate() {
        for (row, z) in vec.iter().enumerate() {
            w[(row, col)] = *z;
        }
    }
    let basis = (w.max_abs_diff(&ComplexMatrix::identity(2)) > 1e-12).then_some(w);

    let reps = match processing {
        Processing::Adjoint => 1,
        Processing::Identity => spec.depth,
    };
    let mut post = Vec::new();
    for _ in 0..reps {
        for g in v.gates_on(0)?.iter().rev() {
            post.extend(g.inverse());
        }
    }
    Ok(CustomFrame { basis, post })
}

fn on_qubit(g: &Gate, q: usize) -> Gate {
    Gate::new(g.kind().clone(), vec![q]).expect("single-qubit gate")
}

// Preparation, black-box layers and processing, but no measurement.
fn assemble_evolution(spec: &SchemeSpec, hyp: Hypothesis, frame: Option<&CustomFrame>) -> Result<(Circuit, f64)> {
    let (w, d) = (spec.width, spec.depth);
    let entangler = build_entangler_rooted(w, spec.primitive, spec.root)?;
    let gamma = entangler.ghz_phase().unwrap_or(0.0);
    let delta = wrap_phase(spec.lambda_phase_effective() - gamma);

    let mut c = Circuit::new(w);
    c.append(&entangler)?;
    c.extend(rz_reduced(spec.root, delta))?;
    if let Some(basis) = frame.and_then(|f| f.basis.as_ref()) {
        for q in 0..w {
            c.push(Gate::u1q(q, basis.clone())?)?;
        }
    }

    if spec.example == Example::Example2 {
        for q in 0..w {
            c.extend([Gate::sx(q), Gate::x(q)])?;
        }
    }
    for layer in 0..d {
        if layer > 0 {
            match &spec.example {
                Example::Example1 => {}
                Example::Example2 => c.extend((0..w).map(Gate::x)).map(|_| ())?,
                Example::Custom { v, processing, .. } => {
                    if *processing == Processing::Adjoint {
                        for q in 0..w {
                            for g in v.gates_on(q)?.iter().rev() {
                                c.extend(g.inverse())?;
                            }
                        }
                    }
                }
            }
        }
        for q in 0..w {
            c.extend(spec.example.channel_gates(spec.n_copies, hyp, q)?)?;
        }
    }
    match (&spec.example, frame) {
        (Example::Example2, _) => {
            for q in 0..w {
                c.extend([Gate::x(q), Gate::sx(q)])?;
            }
        }
        (Example::Custom { .. }, Some(f)) => {
            for q in 0..w {
                c.extend(f.post.iter().map(|g| on_qubit(g, q)))?;
            }
            if let Some(basis) = &f.basis {
                for q in 0..w {
                    c.push(Gate::u1q(q, basis.adjoint())?)?;
                }
            }
        }
        _ => {}
    }
    Ok((c, delta))
}

// Rotation taking the Helstrom axis of two qubit states to +Z, so outcome 0
// favours `h0`.
fn helstrom_rotation(h0: [C64; 2], h1: [C64; 2]) -> Result<ComplexMatrix> {
    let bloch = |s: [C64; 2]| {
        let (a, b) = (s[0], s[1]);
        let x = 2.0 * (a.conj() * b).re;
        let y = 2.0 * (a.conj() * b).im;
        let z = a.norm_sqr() - b.norm_sqr();
        [x, y, z]
    };
    let (r0, r1) = (bloch(h0), bloch(h1));
    let diff = [r0[0] - r1[0], r0[1] - r1[1], r0[2] - r1[2]];
    let len = diff.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len < 1e-12 {
        return Ok(ComplexMatrix::identity(2));
    }
    let n = diff.map(|x| x / len);
    let polar = n[2].clamp(-1.0, 1.0).acos();
    let azimuth = n[1].atan2(n[0]);
    // |n+⟩ = (cos(t/2), e^{iφ} sin(t/2)), |n−⟩ = (−e^{−iφ} sin(t/2), cos(t/2))
    let (ct, st) = ((polar / 2.0).cos(), (polar / 2.0).sin());
    let plus = [c(ct, 0.0), C64::from_polar(st, azimuth)];
    let minus = [-C64::from_polar(st, -azimuth), c(ct, 0.0)];
    // R = |0⟩⟨n+| + |1⟩⟨n−|
    Ok(ComplexMatrix::from_2x2(
        plus[0].conj(),
        plus[1].conj(),
        minus[0].conj(),
        minus[1].conj(),
    ))
}

/// Full circuit for one hypothesis: discriminator preparation, `d` layers
/// of `w` black boxes with processing, measurement, all qubits measured.
///
/// Noiselessly, `H0` always lands on all-zeros for the short and XOR
/// measurements and on even parity for the parity measurement.
pub fn assemble_scheme(spec: &SchemeSpec, hyp: Hypothesis) -> Result<Circuit> {
    spec.validate()?;
    assemble_validated(spec, hyp)
}

/// Like [`assemble_scheme`] for a block using only `w·d ≤ N` of the
/// black-box budget; the black box keeps its `N`-copy parameters.
pub fn assemble_partial_scheme(spec: &SchemeSpec, hyp: Hypothesis) -> Result<Circuit> {
    spec.validate_layout(false)?;
    assemble_validated(spec, hyp)
}

fn assemble_validated(spec: &SchemeSpec, hyp: Hypothesis) -> Result<Circuit> {
    let w = spec.width;
    let frame = match &spec.example {
        Example::Custom { v, processing, .. } => Some(custom_frame(spec, v, *processing)?),
        _ => None,
    };
    let (mut c, delta) = assemble_evolution(spec, hyp, frame.as_ref())?;

    if spec.measurement == MeasurementKind::Parity {
        c.append(&build_measurement_rooted(w, MeasurementKind::Parity, spec.primitive, spec.root)?)?;
        c.measure_all();
        return Ok(c);
    }

    if spec.example == Example::Example2 {
        c.push(Gate::rz(0, FRAC_PI_2))?;
    }
    c.extend(rz_reduced(spec.root, -delta))?;
    c.append(&build_entangler_rooted(w, spec.primitive, spec.root)?.inverse())?;

    if frame.is_some() {
        // Both hypotheses now sit on the root qubit with the rest in |0…0⟩;
        // measure the root along the Helstrom axis.
        let mut root_states = [[C64::new(0.0, 0.0); 2]; 2];
        for h in Hypothesis::BOTH {
            let (mut evo, _) = assemble_evolution(spec, h, frame.as_ref())?;
            evo.extend(rz_reduced(spec.root, -delta))?;
            evo.append(&build_entangler_rooted(w, spec.primitive, spec.root)?.inverse())?;
            let out = run_statevector(&evo, None)?;
            let amps = out.amplitudes();
            root_states[h.index()] = [amps[0], amps[1 << spec.root]];
        }
        c.push(Gate::u1q(spec.root, helstrom_rotation(root_states[0], root_states[1])?)?)?;
    }

    if spec.measurement == MeasurementKind::Xor {
        let tail = build_measurement_rooted(w, MeasurementKind::Xor, spec.primitive, spec.root)?;
        let short_len = build_entangler_rooted(w, spec.primitive, spec.root)?.inverse().ops().len();
        c.extend(tail.ops()[short_len..].iter().cloned())?;
    }
    c.measure_all();
    Ok(c)
}

/// The product `X_d·U^⊗w·X_{d−1}···X_1·U^⊗w·X_0` for Example 2.
///
/// Every factor is a `w`-fold tensor power, so the product is formed on one
/// qubit and lifted once.
pub fn collapse_processed_unitary(spec: &SchemeSpec, hyp: Hypothesis) -> Result<ComplexMatrix> {
    spec.validate()?;
    if spec.example != Example::Example2 {
        return Err(Error::InvalidSpec("processing collapse is defined for Example 2".into()));
    }
    let sx = gate_matrix(&GateKind::SX);
    let x = gate_matrix(&GateKind::X);
    let black_box = spec
        .example
        .channel_gates(spec.n_copies, hyp, 0)?
        .iter()
        .fold(ComplexMatrix::identity(2), |acc, g| g.matrix().matmul(&acc));

    let mut acc = x.matmul(&sx);
    for i in 0..spec.depth {
        if i > 0 {
            acc = x.matmul(&acc);
        }
        acc = black_box.matmul(&acc);
    }
    Ok(sx.matmul(&x).matmul(&acc).kron_power(spec.width))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::rz_matrix;
    use crate::simulator::{exact_distribution, format_bits, BitOrder};

    #[test]
    fn spec_validation() {
        assert!(SchemeSpec::new(Example::Example1, 6, 4, 2).validate().is_err());
        assert!(SchemeSpec::new(Example::Example1, 6, 0, 6).validate().is_err());
        assert!(SchemeSpec::new(Example::Example1, 42, 21, 2).validate().is_err());
        assert!(SchemeSpec::new(Example::Example1, 6, 6, 1).with_root(6).validate().is_err());
        assert!(SchemeSpec::new(Example::Example1, 6, 6, 1)
            .with_measurement(MeasurementKind::Parity)
            .validate()
            .is_err());
        SchemeSpec::new(Example::Example2, 6, 3, 2)
            .with_measurement(MeasurementKind::Parity)
            .validate()
            .unwrap();
        assert!(matches!(
            assemble_scheme(&SchemeSpec::new(Example::Example1, 6, 4, 2), Hypothesis::H0),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn example1_parallel_layer_has_six_rz() {
        let spec = SchemeSpec::new(Example::Example1, 6, 6, 1);
        let c = assemble_scheme(&spec, Hypothesis::H1).unwrap();
        let rz: Vec<&Gate> = c
            .ops()
            .iter()
            .filter(|g| matches!(g.kind(), GateKind::RZ(phi) if (*phi - PI / 6.0).abs() < 1e-15))
            .collect();
        assert_eq!(rz.len(), 6);
        let h0 = assemble_scheme(&spec, Hypothesis::H0).unwrap();
        assert!(h0.ops().iter().all(|g| !matches!(g.kind(), GateKind::RZ(_))));
    }

    #[test]
    fn single_use_perfect_discrimination() {
        let spec = SchemeSpec::new(Example::Example1, 1, 1, 1);
        let h0 = exact_distribution(&assemble_scheme(&spec, Hypothesis::H0).unwrap()).unwrap();
        let h1 = exact_distribution(&assemble_scheme(&spec, Hypothesis::H1).unwrap()).unwrap();
        assert_eq!(h0.support(1e-9), vec![0]);
        assert_eq!(h1.support(1e-9), vec![1]);
    }

    #[test]
    fn rooted_example1_matches_printed_fixture() {
        let spec = SchemeSpec::new(Example::Example1, 6, 6, 1).with_root(2);
        let h1 = exact_distribution(&assemble_scheme(&spec, Hypothesis::H1).unwrap()).unwrap();
        let s = h1.support(1e-9);
        assert_eq!(s.len(), 1);
        assert_eq!(format_bits(s[0], 6, BitOrder::QubitZeroFirst), "001000");
    }

    #[test]
    fn collapse_single_layer() {
        let spec = SchemeSpec::new(Example::Example2, 1, 1, 1);
        let m = collapse_processed_unitary(&spec, Hypothesis::H0).unwrap();
        assert!(m.max_abs_diff_up_to_phase(&rz_matrix(-FRAC_PI_2)) < 1e-12);
    }

    #[test]
    fn collapse_rejects_other_examples() {
        let spec = SchemeSpec::new(Example::Example1, 2, 1, 2);
        assert!(collapse_processed_unitary(&spec, Hypothesis::H0).is_err());
    }

    #[test]
    fn unitary_spec_forms_agree() {
        let gates = UnitarySpec::Gates {
            gates: vec![
                NamedGate { name: "sx".into(), angle: None },
                NamedGate { name: "rz".into(), angle: Some(0.4) },
            ],
        };
        let m = gates.matrix().unwrap();
        let expected = rz_matrix(0.4).matmul(&gate_matrix(&GateKind::SX));
        assert!(m.max_abs_diff(&expected) < 1e-15);
        let e = m.entries();
        let raw = UnitarySpec::Matrix {
            matrix: [
                [e[0].re, e[0].im],
                [e[1].re, e[1].im],
                [e[2].re, e[2].im],
                [e[3].re, e[3].im],
            ],
        };
        assert!(raw.matrix().unwrap().max_abs_diff(&m) < 1e-15);
        let bad = UnitarySpec::Gates { gates: vec![NamedGate { name: "rz".into(), angle: None }] };
        assert!(bad.matrix().is_err());
    }

    #[test]
    fn helstrom_rotation_separates_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h0 = [c(s, 0.0), c(0.0, s)];
        let h1 = [c(1.0, 0.0), c(0.0, 0.0)];
        let r = helstrom_rotation(h0, h1).unwrap();
        let p0 = |v: [C64; 2]| r.apply(&v)[0].norm_sqr();
        // Helstrom optimum for overlap 1/2: ½ + ½·sin(π/4).
        let p = 0.5 * p0(h0) + 0.5 * (1.0 - p0(h1));
        assert!((p - (0.5 + 0.5 * (PI / 4.0).sin())).abs() < 1e-12);
    }
}
