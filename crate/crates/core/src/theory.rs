//! Closed-form discrimination theory for unitary channels.
//!
//! For a normal operator the numerical range is the convex hull of its
//! spectrum, so every quantity here reduces to eigenphase geometry on the
//! unit circle: the arc function θ, the minimum modulus ν = cos(θ/2) over
//! the hull (or 0 once θ ≥ π), the diamond distance 2√(1−ν²) and the
//! Helstrom success probability ½ + ¼·‖Φ_U − Φ_V‖⋄.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    angle_diff, c, eigen_unitary, is_unitary, C64, ComplexMatrix, StateVector, DEFAULT_TOL,
};

/// Tolerance a [`UnitaryPair`] is validated against.
pub const PAIR_TOL: f64 = 1e-10;

/// Two qubit unitaries `U` (hypothesis 0) and `V` (hypothesis 1).
#[derive(Clone, Debug)]
pub struct UnitaryPair {
    u: ComplexMatrix,
    v: ComplexMatrix,
}

impl UnitaryPair {
    pub fn new(u: ComplexMatrix, v: ComplexMatrix) -> Result<Self> {
        for m in [&u, &v] {
            if m.rows() != 2 || m.cols() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: m.rows().max(m.cols()),
                });
            }
            if !is_unitary(m, PAIR_TOL)? {
                return Err(Error::NotUnitary);
            }
        }
        Ok(Self { u, v })
    }

    pub fn u(&self) -> &ComplexMatrix {
        &self.u
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    /// `V†U`, whose spectrum controls distinguishability.
    pub fn relative(&self) -> ComplexMatrix {
        self.v.adjoint().matmul(&self.u)
    }
}

/// Copies needed for perfect discrimination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinCopies {
    Finite(u64),
    Infinite,
}

impl fmt::Display for MinCopies {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinCopies::Finite(n) => write!(f, "{n}"),
            MinCopies::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationReport {
    pub theta: f64,
    pub nu: f64,
    pub diamond: f64,
    pub p_succ_bound: f64,
    pub min_copies: MinCopies,
}

/// Arc length of the smallest circular arc holding all `phases`.
///
/// Phases are assumed to lie in `[0, 2π)`. Arcs below `tol` collapse to 0.
pub fn arc_of_phases(phases: &[f64], tol: f64) -> f64 {
    if phases.len() < 2 {
        return 0.0;
    }
    let mut sorted = phases.to_vec();
    sorted.sort_by(f64::total_cmp);
    let wrap_gap = TAU - sorted[sorted.len() - 1] + sorted[0];
    let max_gap = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap_gap, f64::max);
    let theta = TAU - max_gap;
    if theta < tol {
        0.0
    } else {
        theta
    }
}

/// The arc function θ(U) of a unitary.
pub fn arc_function(u: &ComplexMatrix) -> Result<f64> {
    arc_function_with_tol(u, DEFAULT_TOL)
}

pub fn arc_function_with_tol(u: &ComplexMatrix, tol: f64) -> Result<f64> {
    let eig = eigen_unitary(u, tol)?;
    Ok(arc_of_phases(&eig.phases, tol))
}

/// ν as a function of the arc: the origin's distance to the chord joining
/// the two extreme eigenvalues.
pub fn nu_from_arc(theta: f64) -> f64 {
    if theta < PI {
        (theta / 2.0).cos()
    } else {
        0.0
    }
}

/// `min |w|` over the numerical range of `V†U`.
pub fn nu_min_modulus(pair: &UnitaryPair) -> Result<f64> {
    Ok(nu_from_arc(arc_function(&pair.relative())?))
}

/// Minimum copies for perfect discrimination, `⌈π/θ⌉`.
///
/// A 1e-9 slack absorbs rounding when π/θ is an integer.
pub fn min_copies_from_arc(theta: f64) -> MinCopies {
    if theta <= 0.0 {
        MinCopies::Infinite
    } else {
        MinCopies::Finite(((PI / theta) - 1e-9).ceil().max(1.0) as u64)
    }
}

pub fn report_from_arc(theta: f64) -> DiscriminationReport {
    let nu = nu_from_arc(theta);
    let diamond = 2.0 * (1.0 - nu * nu).max(0.0).sqrt();
    DiscriminationReport {
        theta,
        nu,
        diamond,
        p_succ_bound: 0.5 + diamond / 4.0,
        min_copies: min_copies_from_arc(theta),
    }
}

pub fn discrimination_report(pair: &UnitaryPair) -> Result<DiscriminationReport> {
    Ok(report_from_arc(arc_function(&pair.relative())?))
}

/// Optimal success probability with `n` black-box uses, assuming
/// processing that restores the full arc `min(n·θ, π)`.
pub fn multi_copy_bound(theta: f64, n: usize) -> f64 {
    let total = (n as f64 * theta).min(PI);
    report_from_arc(total).p_succ_bound
}

/// Independent estimate of `min |⟨x|M|x⟩|` by sampling.
///
/// Draws `samples` Haar-random unit vectors and, in addition, evaluates the
/// optimal two-point mixture of every pair of Schur vectors. For a normal
/// matrix the Schur vectors are eigenvectors, so the pair term hits the
/// exact minimum whenever it lies on a chord.
pub fn numerical_range_min_bruteforce(m: &ComplexMatrix, samples: usize, seed: u64) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n > 16 {
        return Err(Error::TooLarge { dim: n, max: 16 });
    }
    let quad = |x: &[C64]| -> f64 {
        let mx = m.apply(x);
        let num: C64 = x.iter().zip(&mx).map(|(a, b)| a.conj() * b).sum();
        let den: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        num.norm() / den
    };

    let mut best = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![C64::new(0.0, 0.0); n];
    for _ in 0..samples {
        for z in x.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z = c(re, im);
        }
        best = best.min(quad(&x));
    }

    let (q, t) = m.to_nalgebra().schur().unpack();
    let vecs: Vec<Vec<C64>> = (0..n).map(|k| q.column(k).iter().copied().collect()).collect();
    let vals: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    for i in 0..n {
        best = best.min(quad(&vecs[i]));
        for j in i + 1..n {
            let d = vals[i] - vals[j];
            let weight = if d.norm_sqr() > 0.0 {
                ((-vals[j] * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0)
            } else {
                0.5
            };
            let mix: Vec<C64> = vecs[i]
                .iter()
                .zip(&vecs[j])
                .map(|(a, b)| a * weight.sqrt() + b * (1.0 - weight).sqrt())
                .collect();
            best = best.min(quad(&mix));
        }
    }
    Ok(best)
}

/// Unit vector with `⟨ψ|M|ψ⟩ = 0`, using the default phase `λ = 1`.
pub fn discriminator_state(m: &ComplexMatrix, tol: f64) -> Result<StateVector> {
    discriminator_state_with_phase(m, tol, c(1.0, 0.0))
}

/// As [`discriminator_state`], with `λ` multiplying one eigenvector of an
/// antipodal pair: the one whose dominant basis index is larger, so that
/// for diagonal operators the state reads `(|a⟩ + λ|b⟩)/√2` with `a < b`.
///
/// Uses an antipodal eigenvalue pair when one exists; otherwise scans
/// eigenvalue triples in sorted-phase order and takes the first whose
/// triangle contains the origin (Carathéodory), weighting eigenvectors by
/// the square roots of the barycentric coordinates.
pub fn discriminator_state_with_phase(
    m: &ComplexMatrix,
    tol: f64,
    lambda: C64,
) -> Result<StateVector> {
    let eig = eigen_unitary(m, tol)?;
    let theta = arc_of_phases(&eig.phases, tol);
    if theta < PI - tol {
        return Err(Error::NoZeroInHull { arc: theta });
    }
    let n = eig.phases.len();
    let lambda = lambda / lambda.norm();

    let mut weights: Option<Vec<(usize, C64)>> = None;
    'pairs: for i in 0..n {
        for j in i + 1..n {
            if (angle_diff(eig.phases[j], eig.phases[i]).abs() - PI).abs() <= tol {
                let w = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                let (lo, hi) = if dominant_index(&eig.vectors[i]) <= dominant_index(&eig.vectors[j]) {
                    (i, j)
                } else {
                    (j, i)
                };
                weights = Some(vec![(lo, w), (hi, w * lambda)]);
                break 'pairs;
            }
        }
    }

    if weights.is_none() {
        let cross = |a: C64, b: C64| a.re * b.im - a.im * b.re;
        'triples: for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, cc) = (eig.eigenvalue(i), eig.eigenvalue(j), eig.eigenvalue(k));
                    let det = cross(a, b) + cross(b, cc) + cross(cc, a);
                    if det.abs() < 1e-14 {
                        continue;
                    }
                    let bary = [cross(b, cc) / det, cross(cc, a) / det, cross(a, b) / det];
                    if bary.iter().all(|&p| p >= -1e-12) {
                        let clamped: Vec<f64> = bary.iter().map(|p| p.max(0.0)).collect();
                        let total: f64 = clamped.iter().sum();
                        weights = Some(
                            [i, j, k]
                                .into_iter()
                                .zip(clamped)
                                .map(|(idx, p)| (idx, c((p / total).sqrt(), 0.0)))
                                .collect(),
                        );
                        break 'triples;
                    }
                }
            }
        }
    }

    let weights = weights.ok_or(Error::NoZeroInHull { arc: theta })?;
    let mut amps = vec![C64::new(0.0, 0.0); n];
    for (idx, w) in weights {
        for (a, v) in amps.iter_mut().zip(&eig.vectors[idx]) {
            *a += w * v;
        }
    }
    let psi = StateVector::new(amps)?;
    let residual = psi.expectation(m)?.norm();
    if residual > 10.0 * tol {
        return Err(Error::NoZeroInHull { arc: theta });
    }
    Ok(psi)
}

fn dominant_index(v: &[C64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map_or(0, |(k, _)| k)
}

/// Helstrom success probability for two equiprobable pure states.
pub fn helstrom_pair_success(psi0: &StateVector, psi1: &StateVector) -> Result<f64> {
    let overlap = psi0.inner(psi1)?.norm_sqr().min(1.0);
    Ok(0.5 + 0.5 * (1.0 - overlap).sqrt())
}
