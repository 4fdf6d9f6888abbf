//! Exact statevector simulation and noisy trajectory sampling.

pub mod kernel;
mod noise;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{StateVector, C64};

pub use noise::{sample_counts, sample_shots, NoiseModel};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 20;

/// Print order for outcome bitstrings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitOrder {
    /// Leftmost character is qubit 0.
    #[default]
    QubitZeroFirst,
    /// Leftmost character is the highest qubit (the usual hardware printout).
    QubitZeroLast,
}

/// Renders the low `len` bits of `value`; bit `k` is measured qubit `k`.
pub fn format_bits(value: u64, len: usize, order: BitOrder) -> String {
    let bit = |k: usize| if value >> k & 1 == 1 { '1' } else { '0' };
    match order {
        BitOrder::QubitZeroFirst => (0..len).map(bit).collect(),
        BitOrder::QubitZeroLast => (0..len).rev().map(bit).collect(),
    }
}

pub fn parse_bits(s: &str, order: BitOrder) -> Result<u64> {
    let mut value = 0u64;
    let len = s.len();
    for (i, ch) in s.chars().enumerate() {
        let k = match order {
            BitOrder::QubitZeroFirst => i,
            BitOrder::QubitZeroLast => len - 1 - i,
        };
        match ch {
            '0' => {}
            '1' => value |= 1 << k,
            _ => return Err(Error::InvalidConfig(format!("`{s}` is not a bitstring"))),
        }
    }
    Ok(value)
}

/// Probabilities of measured-bit outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    n_bits: usize,
    probs: BTreeMap<u64, f64>,
}

impl Distribution {
    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn probs(&self) -> &BTreeMap<u64, f64> {
        &self.probs
    }

    pub fn prob(&self, outcome: u64) -> f64 {
        self.probs.get(&outcome).copied().unwrap_or(0.0)
    }

    /// Outcomes with probability above `cutoff`.
    pub fn support(&self, cutoff: f64) -> Vec<u64> {
        self.probs
            .iter()
            .filter(|(_, &p)| p > cutoff)
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn formatted(&self, order: BitOrder) -> BTreeMap<String, f64> {
        self.probs
            .iter()
            .map(|(&k, &p)| (format_bits(k, self.n_bits, order), p))
            .collect()
    }
}

/// Shot histogram over measured-bit outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeCounts {
    n_bits: usize,
    counts: BTreeMap<u64, u64>,
    shots: u64,
    seed: u64,
}

impl OutcomeCounts {
    pub fn new(n_bits: usize, counts: BTreeMap<u64, u64>, seed: u64) -> Self {
        let shots = counts.values().sum();
        Self { n_bits, counts, shots, seed }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn get(&self, outcome: u64) -> u64 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn formatted(&self, order: BitOrder) -> BTreeMap<String, u64> {
        self.counts
            .iter()
            .map(|(&k, &n)| (format_bits(k, self.n_bits, order), n))
            .collect()
    }
}

pub(crate) fn check_width(c: &Circuit) -> Result<()> {
    if c.n_qubits() > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            n: c.n_qubits(),
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

pub(crate) fn apply_gate(amps: &mut [C64], g: &Gate) {
    let q = g.qubits();
    let m = g.matrix();
    match q.len() {
        1 => kernel::apply_1q(amps, q[0], &kernel::mat2(&m)),
        _ => kernel::apply_2q(amps, q[0], q[1], &kernel::mat4(&m)),
    }
}

/// Applies the circuit's gates in order to `input` (default `|0…0⟩`).
pub fn run_statevector(c: &Circuit, input: Option<&StateVector>) -> Result<StateVector> {
    check_width(c)?;
    let dim = 1usize << c.n_qubits();
    let mut state = match input {
        Some(s) if s.dim() != dim => {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            })
        }
        Some(s) => s.clone(),
        None => StateVector::zero_state(c.n_qubits()),
    };
    for g in c.ops() {
        apply_gate(state.amplitudes_mut(), g);
    }
    Ok(state)
}

/// Packs the measured qubits of basis index `index` into an outcome.
#[inline]
pub(crate) fn project_index(index: usize, measured: &[usize]) -> u64 {
    measured
        .iter()
        .enumerate()
        .fold(0u64, |acc, (k, &q)| acc | (((index >> q) & 1) as u64) << k)
}

pub(crate) fn marginal(amps: &[C64], measured: &[usize]) -> BTreeMap<u64, f64> {
    let mut probs = BTreeMap::new();
    for (i, a) in amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p > 0.0 {
            *probs.entry(project_index(i, measured)).or_insert(0.0) += p;
        }
    }
    probs
}

/// Noiseless outcome distribution over the measured qubits.
///
/// Outcomes with probability below 1e-15 are dropped.
pub fn exact_distribution(c: &Circuit) -> Result<Distribution> {
    let state = run_statevector(c, None)?;
    let mut probs = marginal(state.amplitudes(), c.measured());
    probs.retain(|_, p| *p > 1e-15);
    Ok(Distribution {
        n_bits: c.measured().len(),
        probs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_entangler, Primitive};
    use approx::assert_abs_diff_eq;

    #[test]
    fn hadamard_on_zero() {
        let mut c = Circuit::new(1);
        c.push(Gate::h(0)).unwrap();
        let s = run_statevector(&c, None).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amplitudes()[0].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[1].re, r, epsilon = 1e-15);
    }

    #[test]
    fn ghz_three() {
        let c = build_entangler(3, Primitive::Cnot).unwrap();
        let s = run_statevector(&c, None).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for (i, a) in s.amplitudes().iter().enumerate() {
            let expected = if i == 0 || i == 7 { r } else { 0.0 };
            assert_abs_diff_eq!(a.re, expected, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ghz_two_distribution() {
        let mut c = build_entangler(2, Primitive::Cnot).unwrap();
        c.measure_all();
        let d = exact_distribution(&c).unwrap();
        let f = d.formatted(BitOrder::QubitZeroFirst);
        assert_eq!(f.len(), 2);
        assert_abs_diff_eq!(f["00"], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f["11"], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn width_and_dimension_errors() {
        let c = Circuit::new(21);
        assert!(matches!(run_statevector(&c, None), Err(Error::TooManyQubits { .. })));
        let c2 = Circuit::new(2);
        let s = StateVector::zero_state(3);
        assert!(matches!(
            run_statevector(&c2, Some(&s)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bit_formatting() {
        assert_eq!(format_bits(0b000100, 6, BitOrder::QubitZeroFirst), "001000");
        assert_eq!(format_bits(0b000100, 6, BitOrder::QubitZeroLast), "000100");
        let v = parse_bits("001000", BitOrder::QubitZeroFirst).unwrap();
        assert_eq!(v, 0b100);
        assert!(parse_bits("01x", BitOrder::QubitZeroFirst).is_err());
    }

    #[test]
    fn partial_measurement_marginalizes() {
        let mut c = build_entangler(3, Primitive::Cnot).unwrap();
        c.measure(2).unwrap();
        let d = exact_distribution(&c).unwrap();
        assert_eq!(d.n_bits(), 1);
        assert_abs_diff_eq!(d.prob(0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(d.prob(1), 0.5, epsilon = 1e-12);
    }
}
