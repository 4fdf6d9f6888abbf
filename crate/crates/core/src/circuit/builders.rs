//! Discriminator preparation and measurement circuits.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{Circuit, Gate, MeasurementKind, Primitive, MAX_WIDTH};
use crate::error::{Error, Result};
use crate::linalg::StateVector;
use crate::simulator::run_statevector;

/// Widths up to this size get an exhaustive correction search.
const EXHAUSTIVE_LIMIT: usize = 12;

const FIDELITY_TOL: f64 = 1e-9;

/// What an X-correction layer has to reach.
#[derive(Clone, Debug)]
pub enum CorrectionTarget {
    /// A specific state, up to global phase.
    State(StateVector),
    /// Any `(|0…0⟩ + e^{iγ}|1…1⟩)/√2`.
    GhzForm,
}

fn check_width(w: usize) -> Result<()> {
    if w == 0 || w > MAX_WIDTH {
        return Err(Error::InvalidSpec(format!("width {w} is outside 1..={MAX_WIDTH}")));
    }
    Ok(())
}

// Cascade order: root → root+1 → … → w−1, then root → root−1 → … → 0.
fn cascade_edges(w: usize, root: usize) -> Vec<(usize, usize)> {
    let up = (root..w.saturating_sub(1)).map(|q| (q, q + 1));
    let down = (1..=root).rev().map(|q| (q, q - 1));
    up.chain(down).collect()
}

/// GHZ preparation on `w` qubits, cascading out of qubit 0.
pub fn build_entangler(w: usize, primitive: Primitive) -> Result<Circuit> {
    build_entangler_rooted(w, primitive, 0)
}

/// GHZ preparation cascading out of `root`.
///
/// The CNOT form is `H(root)` followed by a CNOT chain. The ECR form puts
/// `SX` on every qubit, runs an ECR chain of the same shape, and closes with
/// the smallest X layer that lands in GHZ form (found by
/// [`derive_pauli_corrections`]). Either way the relative phase γ of
/// `(|0…0⟩ + e^{iγ}|1…1⟩)/√2` is recorded in [`Circuit::ghz_phase`].
pub fn build_entangler_rooted(w: usize, primitive: Primitive, root: usize) -> Result<Circuit> {
    check_width(w)?;
    if root >= w {
        return Err(Error::InvalidSpec(format!("root {root} is not below width {w}")));
    }
    let mut c = Circuit::new(w);
    match primitive {
        Primitive::Cnot => {
            c.push(Gate::h(root))?;
            for (a, b) in cascade_edges(w, root) {
                c.push(Gate::cnot(a, b))?;
            }
        }
        Primitive::Ecr => {
            for q in 0..w {
                c.push(Gate::sx(q))?;
            }
            for (a, b) in cascade_edges(w, root) {
                c.push(Gate::ecr(a, b))?;
            }
            for q in derive_pauli_corrections(&c, &CorrectionTarget::GhzForm)? {
                c.push(Gate::x(q))?;
            }
        }
    }
    let out = run_statevector(&c, None)?;
    let amps = out.amplitudes();
    let gamma = (amps[amps.len() - 1] / amps[0]).arg();
    c.set_ghz_phase(Some(if gamma.abs() < 1e-12 { 0.0 } else { gamma }));
    Ok(c)
}

fn fidelity_after_flip(out: &[crate::linalg::C64], mask: usize, target: &CorrectionTarget) -> f64 {
    match target {
        CorrectionTarget::GhzForm => {
            let all = out.len() - 1;
            (out[mask].norm() + out[all ^ mask].norm()) * std::f64::consts::FRAC_1_SQRT_2
        }
        CorrectionTarget::State(t) => t
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| a.conj() * out[i ^ mask])
            .sum::<crate::linalg::C64>()
            .norm(),
    }
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Smallest set of qubits whose X layer, appended to `c`, reaches `target`
/// with fidelity at least `1 − 1e-9`.
///
/// Sets are ordered by size, then lexicographically. Circuits of width up
/// to 12 are searched exhaustively; wider ones take the two dominant basis
/// branches and flip whichever needs fewer X gates to become `|0…0⟩`.
pub fn derive_pauli_corrections(c: &Circuit, target: &CorrectionTarget) -> Result<Vec<usize>> {
    let w = c.n_qubits();
    if let CorrectionTarget::State(t) = target {
        if t.dim() != 1 << w {
            return Err(Error::DimensionMismatch {
                expected: 1 << w,
                found: t.dim(),
            });
        }
    }
    let out = run_statevector(c, None)?;
    let amps = out.amplitudes();
    let accept = |mask: usize| fidelity_after_flip(amps, mask, target) >= 1.0 - FIDELITY_TOL;
    let to_mask = |set: &[usize]| set.iter().fold(0usize, |m, &q| m | 1 << q);

    if w <= EXHAUSTIVE_LIMIT {
        for k in 0..=w {
            let mut idx: Vec<usize> = (0..k).collect();
            loop {
                if accept(to_mask(&idx)) {
                    return Ok(idx);
                }
                if k == 0 || !next_combination(&mut idx, w) {
                    break;
                }
            }
        }
        return Err(Error::CorrectionNotFound);
    }

    let mut order: Vec<usize> = (0..amps.len()).collect();
    order.sort_by(|&a, &b| amps[b].norm_sqr().total_cmp(&amps[a].norm_sqr()).then(a.cmp(&b)));
    let (b1, b2) = (order[0], order[1]);
    let mut candidates = [b1, b2];
    candidates.sort_by_key(|m| (m.count_ones(), *m));
    for mask in candidates {
        if accept(mask) {
            return Ok((0..w).filter(|q| mask >> q & 1 == 1).collect());
        }
    }
    Err(Error::CorrectionNotFound)
}

/// CNOT(control, target) written with one ECR plus single-qubit gates,
/// equal to CNOT up to global phase.
pub fn cnot_via_ecr(control: usize, target: usize) -> Vec<Gate> {
    // ECR = X_c·exp(−iπ/4·Z_c X_t), and
    // CNOT ∝ exp(−iπ/4 Z_c)·exp(−iπ/4 X_t)·exp(+iπ/4 Z_c X_t)
    //      ∝ RZ_c(π/2)·SX_t·Z_c X_t X_c·ECR.
    vec![
        Gate::ecr(control, target),
        Gate::x(control),
        Gate::rz(control, PI + FRAC_PI_2),
        Gate::x(target),
        Gate::sx(target),
    ]
}

fn fan_out(c: &mut Circuit, root: usize, primitive: Primitive) -> Result<()> {
    for q in (0..c.n_qubits()).filter(|&q| q != root) {
        match primitive {
            Primitive::Cnot => {
                c.push(Gate::cnot(root, q))?;
            }
            Primitive::Ecr => {
                c.extend(cnot_via_ecr(root, q))?;
            }
        }
    }
    Ok(())
}

/// Measurement circuit on `w` qubits for an entangler rooted at qubit 0.
pub fn build_measurement(w: usize, kind: MeasurementKind, primitive: Primitive) -> Result<Circuit> {
    build_measurement_rooted(w, kind, primitive, 0)
}

/// Measurement circuit for an entangler rooted at `root`.
///
/// * `Short` uncomputes the entangler; a GHZ state with the entangler's own
///   relative phase returns to `|0…0⟩`, its sign-flipped partner to a single
///   set bit.
/// * `Xor` is `Short` plus a fan-out from `root`, so the two outcomes
///   become all-zeros and all-ones.
/// * `Parity` is `RZ(π/2)` on qubit 0 followed by `H` everywhere.
///
/// Every qubit is measured.
pub fn build_measurement_rooted(
    w: usize,
    kind: MeasurementKind,
    primitive: Primitive,
    root: usize,
) -> Result<Circuit> {
    check_width(w)?;
    let mut c = match kind {
        MeasurementKind::Short | MeasurementKind::Xor => {
            let mut c = build_entangler_rooted(w, primitive, root)?.inverse();
            if kind == MeasurementKind::Xor {
                fan_out(&mut c, root, primitive)?;
            }
            c
        }
        MeasurementKind::Parity => {
            let mut c = Circuit::new(w);
            c.push(Gate::rz(0, FRAC_PI_2))?;
            for q in 0..w {
                c.push(Gate::h(q))?;
            }
            c
        }
    };
    c.measure_all();
    Ok(c)
}
