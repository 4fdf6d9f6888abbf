//! Stochastic Pauli trajectories with classical readout flips.
//!
//! Draw order for shot `s` (stream `s` of a ChaCha8 generator keyed by the
//! run seed): one uniform per noisy gate, plus one Pauli index when that
//! uniform falls below the gate's error rate; then one uniform selecting the
//! outcome; then one uniform per measured bit for readout flips.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{apply_1q, apply_2q, mat2, mat4, mul2, Mat2, Mat4};
use super::{check_width, marginal, project_index, OutcomeCounts};
use crate::circuit::{rx_matrix, Circuit};
use crate::error::{Error, Result};
use crate::linalg::C64;

const DEFAULT_FIXTURE: &str = include_str!("../../fixtures/noise_default.json");

/// Gate and readout noise.
///
/// `over_rotation` is a systematic extra X rotation (radians) after every
/// X-axis pulse (`x`, `sx`); it accumulates coherently along deep
/// single-qubit chains. `rz` is treated as a virtual frame change and is
/// never over-rotated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub p_read: f64,
    #[serde(default)]
    pub over_rotation: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self { p1: 0.0, p2: 0.0, p_read: 0.0, over_rotation: 0.0 }
    }

    pub fn new(p1: f64, p2: f64, p_read: f64) -> Result<Self> {
        let m = Self { p1, p2, p_read, over_rotation: 0.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn with_over_rotation(mut self, eps: f64) -> Result<Self> {
        self.over_rotation = eps;
        self.validate()?;
        Ok(self)
    }

    /// The shipped default noise fixture.
    pub fn default_fixture() -> Self {
        serde_json::from_str(DEFAULT_FIXTURE).expect("bundled noise fixture parses")
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p_read", self.p_read)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidNoise(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        if !self.over_rotation.is_finite() {
            return Err(Error::InvalidNoise("over_rotation must be finite".into()));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.p_read == 0.0 && self.over_rotation == 0.0
    }
}

#[derive(Clone)]
enum Op {
    One { q: usize, m: Mat2 },
    Two { a: usize, b: usize, m: Mat4 },
}

fn pauli(k: usize) -> Mat2 {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    match k {
        0 => [o, z, z, o],
        1 => [z, o, o, z],
        2 => [z, -i, i, z],
        _ => [o, z, z, -o],
    }
}

struct Trajectories<'a> {
    ops: Vec<Op>,
    n_qubits: usize,
    measured: &'a [usize],
    noise: NoiseModel,
    seed: u64,
    // Cumulative distribution of the error-free (but over-rotated) circuit.
    cdf: Vec<(u64, f64)>,
}

impl<'a> Trajectories<'a> {
    fn compile(c: &'a Circuit, noise: NoiseModel, seed: u64) -> Self {
        let drift = mat2(&rx_matrix(noise.over_rotation));
        let ops: Vec<Op> = c
            .ops()
            .iter()
            .map(|g| {
                let q = g.qubits();
                let m = g.matrix();
                if q.len() == 1 {
                    let mut m = mat2(&m);
                    if noise.over_rotation != 0.0 && g.kind().is_x_pulse() {
                        m = mul2(&drift, &m);
                    }
                    Op::One { q: q[0], m }
                } else {
                    Op::Two { a: q[0], b: q[1], m: mat4(&m) }
                }
            })
            .collect();

        let mut amps = vec![C64::new(0.0, 0.0); 1 << c.n_qubits()];
        amps[0] = C64::new(1.0, 0.0);
        for op in &ops {
            match op {
                Op::One { q, m } => apply_1q(&mut amps, *q, m),
                Op::Two { a, b, m } => apply_2q(&mut amps, *a, *b, m),
            }
        }
        let mut acc = 0.0;
        let cdf = marginal(&amps, c.measured())
            .into_iter()
            .map(|(k, p)| {
                acc += p;
                (k, acc)
            })
            .collect();

        Self {
            ops,
            n_qubits: c.n_qubits(),
            measured: c.measured(),
            noise,
            seed,
            cdf,
        }
    }

    fn shot(&self, index: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);

        let mut errors: Vec<(usize, usize)> = Vec::new();
        for (i, op) in self.ops.iter().enumerate() {
            let (p, kinds) = match op {
                Op::One { .. } => (self.noise.p1, 4),
                Op::Two { .. } => (self.noise.p2, 16),
            };
            if p > 0.0 && rng.random::<f64>() < p {
                errors.push((i, rng.random_range(1..kinds)));
            }
        }

        let u: f64 = rng.random();
        let mut outcome = if errors.is_empty() {
            self.sample_cdf(u)
        } else {
            self.sample_noisy(&errors, u)
        };

        if self.noise.p_read > 0.0 {
            for k in 0..self.measured.len() {
                if rng.random::<f64>() < self.noise.p_read {
                    outcome ^= 1 << k;
                }
            }
        }
        outcome
    }

    fn sample_cdf(&self, u: f64) -> u64 {
        let total = self.cdf.last().map_or(1.0, |x| x.1);
        let target = u * total;
        let idx = self.cdf.partition_point(|&(_, c)| c <= target);
        self.cdf[idx.min(self.cdf.len() - 1)].0
    }

    // Replays the circuit with Paulis injected, fusing runs of single-qubit
    // operations per wire between two-qubit gates.
    fn sample_noisy(&self, errors: &[(usize, usize)], u: f64) -> u64 {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << self.n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        let mut pending: Vec<Option<Mat2>> = vec![None; self.n_qubits];
        let compose = |slot: &mut Option<Mat2>, m: &Mat2| {
            *slot = Some(match slot {
                Some(prev) => mul2(m, prev),
                None => *m,
            });
        };
        let mut next_err = errors.iter().peekable();
        for (i, op) in self.ops.iter().enumerate() {
            match op {
                Op::One { q, m } => compose(&mut pending[*q], m),
                Op::Two { a, b, m } => {
                    for w in [*a, *b] {
                        if let Some(p) = pending[w].take() {
                            apply_1q(&mut amps, w, &p);
                        }
                    }
                    apply_2q(&mut amps, *a, *b, m);
                }
            }
            while let Some(&&(j, k)) = next_err.peek() {
                if j != i {
                    break;
                }
                next_err.next();
                match op {
                    Op::One { q, .. } => compose(&mut pending[*q], &pauli(k)),
                    Op::Two { a, b, .. } => {
                        let (pa, pb) = (k / 4, k % 4);
                        if pa != 0 {
                            compose(&mut pending[*a], &pauli(pa));
                        }
                        if pb != 0 {
                            compose(&mut pending[*b], &pauli(pb));
                        }
                    }
                }
            }
        }
        for (w, slot) in pending.iter_mut().enumerate() {
            if let Some(p) = slot.take() {
                apply_1q(&mut amps, w, &p);
            }
        }

        let mut acc = 0.0;
        let mut last = 0;
        for (i, a) in amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                last = i;
                acc += p;
                if acc > u {
                    return project_index(i, self.measured);
                }
            }
        }
        project_index(last, self.measured)
    }
}

/// Outcomes of `shots` noisy executions of `c`, indexed by shot.
///
/// Shots are independent and evaluated in parallel; each depends only on
/// the inputs and its own index.
pub fn sample_shots(c: &Circuit, shots: u64, noise: &NoiseModel, seed: u64) -> Result<Vec<u64>> {
    check_width(c)?;
    noise.validate()?;
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be at least 1".into()));
    }
    let traj = Trajectories::compile(c, *noise, seed);
    Ok((0..shots).into_par_iter().map(|s| traj.shot(s)).collect())
}

/// Histogram of [`sample_shots`].
pub fn sample_counts(c: &Circuit, shots: u64, noise: &NoiseModel, seed: u64) -> Result<OutcomeCounts> {
    let mut counts = BTreeMap::new();
    for o in sample_shots(c, shots, noise, seed)? {
        *counts.entry(o).or_insert(0u64) += 1;
    }
    Ok(OutcomeCounts::new(c.measured().len(), counts, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_entangler, Gate, Primitive};
    use crate::simulator::exact_distribution;

    #[test]
    fn fixture_loads_and_validates() {
        let m = NoiseModel::default_fixture();
        m.validate().unwrap();
        assert!(m.p1 > 0.0 && m.p2 > m.p1 && m.p_read > 0.0);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(NoiseModel::new(1.5, 0.0, 0.0).is_err());
        assert!(NoiseModel::new(0.0, -0.1, 0.0).is_err());
        assert!(NoiseModel::noiseless().with_over_rotation(f64::NAN).is_err());
    }

    #[test]
    fn noiseless_ghz_counts() {
        let mut c = build_entangler(2, Primitive::Cnot).unwrap();
        c.measure_all();
        let counts = sample_counts(&c, 10_000, &NoiseModel::noiseless(), 42).unwrap();
        assert_eq!(counts.shots(), 10_000);
        assert_eq!(counts.counts().len(), 2);
        for k in [0b00, 0b11] {
            assert!((counts.get(k) as i64 - 5000).abs() <= 300, "{:?}", counts);
        }
    }

    #[test]
    fn maximal_readout_noise_randomizes_bits() {
        let mut c = build_entangler(3, Primitive::Cnot).unwrap();
        c.measure_all();
        let noise = NoiseModel::new(0.0, 0.0, 0.5).unwrap();
        let counts = sample_counts(&c, 10_000, &noise, 1).unwrap();
        let sigma = (10_000.0f64 * 0.25).sqrt();
        for k in 0..3 {
            let ones: u64 = counts
                .counts()
                .iter()
                .filter(|(o, _)| *o >> k & 1 == 1)
                .map(|(_, n)| n)
                .sum();
            assert!((ones as f64 - 5000.0).abs() <= 3.0 * sigma, "bit {k}: {ones}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let mut c = build_entangler(4, Primitive::Cnot).unwrap();
        c.measure_all();
        let noise = NoiseModel::new(0.01, 0.05, 0.02).unwrap();
        let a = sample_counts(&c, 2000, &noise, 9).unwrap();
        let b = sample_counts(&c, 2000, &noise, 9).unwrap();
        let other = sample_counts(&c, 2000, &noise, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn zero_shots_rejected() {
        let c = Circuit::new(1);
        assert!(sample_counts(&c, 0, &NoiseModel::noiseless(), 0).is_err());
    }

    #[test]
    fn over_rotation_shifts_exact_distribution() {
        // X pulse followed by over-rotation ε: P(0) = sin²(ε/2).
        let mut c = Circuit::new(1);
        c.push(Gate::x(0)).unwrap();
        c.measure_all();
        let eps = 0.3;
        let noise = NoiseModel::noiseless().with_over_rotation(eps).unwrap();
        let traj = Trajectories::compile(&c, noise, 0);
        let p0 = traj.cdf.iter().find(|x| x.0 == 0).map_or(0.0, |x| x.1);
        assert!((p0 - (eps / 2.0).sin().powi(2)).abs() < 1e-12);
        // The noiseless distribution is untouched.
        assert_eq!(exact_distribution(&c).unwrap().support(1e-12), vec![1]);
    }

    #[test]
    fn zero_noise_matches_exact_for_ecr_entangler() {
        let mut c = build_entangler(3, Primitive::Ecr).unwrap();
        c.measure_all();
        let exact = exact_distribution(&c).unwrap();
        let counts = sample_counts(&c, 20_000, &NoiseModel::noiseless(), 3).unwrap();
        for (&k, &n) in counts.counts() {
            assert!(exact.prob(k) > 0.0, "unexpected outcome {k}");
            let p = exact.prob(k);
            let sigma = (20_000.0 * p * (1.0 - p)).sqrt();
            assert!((n as f64 - 20_000.0 * p).abs() <= 4.0 * sigma + 1.0);
        }
    }
}
