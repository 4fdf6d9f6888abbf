//! Small dense complex linear algebra.
//!
//! Everything here is sized for qubit-gate work: operators stay at or below
//! 64×64, state vectors go up to 2^20 amplitudes. Storage is row-major and
//! there is no sparse path.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance for structural predicates and eigen residuals.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest operator dimension supported by the eigenroutine.
pub const MAX_EIGEN_DIM: usize = 64;

pub type C64 = Complex64;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{iφ}`.
#[inline]
pub fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for col in 0..self.cols {
                let z = self[(r, col)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    ///
    /// Panics if `data.len() != rows * cols`.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count does not match shape");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![C64::new(0.0, 0.0); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// Builds a 2×2 matrix from `[[a, b], [c, d]]`.
    pub fn from_2x2(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self::new(2, 2, vec![a, b, c, d])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for col in 0..self.cols {
                out[(col, r)] = self[(r, col)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.rows, self.cols, self.data.iter().map(|&z| z * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::new(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::new(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        )
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Integer power of a square matrix by repeated squaring.
    pub fn pow(&self, mut n: u32) -> Self {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.matmul(&base);
            }
            base = base.matmul(&base);
            n >>= 1;
        }
        acc
    }

    /// `self ⊗ self ⊗ …` (`n` factors).
    pub fn kron_power(&self, n: usize) -> Self {
        assert!(n >= 1);
        let mut acc = self.clone();
        for _ in 1..n {
            acc = kron(&acc, self);
        }
        acc
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Distance to `other` after removing the best global phase.
    pub fn max_abs_diff_up_to_phase(&self, other: &Self) -> f64 {
        // Phase taken from the Hilbert-Schmidt overlap.
        let overlap: C64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        self.scale(phase).max_abs_diff(other)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, col): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + col]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, col): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + col]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product `a ⊗ b`; `a` owns the most significant index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let s = a[(ar, ac)];
            for br in 0..b.rows {
                let dst = (ar * b.rows + br) * cols + ac * b.cols;
                let src = &b.data[br * b.cols..(br + 1) * b.cols];
                for (d, &z) in out.data[dst..dst + b.cols].iter_mut().zip(src) {
                    *d = s * z;
                }
            }
        }
    }
    out
}

/// True iff `‖M†M − I‖_max ≤ tol`.
pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let gram = m.adjoint().matmul(m);
    Ok(gram.max_abs_diff(&ComplexMatrix::identity(m.rows)) <= tol)
}

/// Spectral data of a unitary: phases in `[0, 2π)`, sorted ascending, with
/// unit eigenvectors in matching order.
#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    pub phases: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl UnitaryEigen {
    pub fn eigenvalue(&self, k: usize) -> C64 {
        cis(self.phases[k])
    }
}

// Mixing weights for the Hermitian combination Re(U) + c·Im(U). Eigenvalues
// e^{iφ} map to cos φ + c sin φ, so two distinct phases only collide when
// they sit symmetrically about atan(c); a second weight breaks that.
const MIXING_WEIGHTS: [f64; 4] = [
    0.618_033_988_749_894_9,
    1.732_050_807_568_877_2,
    std::f64::consts::FRAC_1_PI,
    std::f64::consts::E,
];

/// Eigen-decomposition of a unitary through a pair of commuting Hermitian
/// parts, `(U+U†)/2` and `(U−U†)/(2i)`, diagonalized jointly.
pub fn eigen_unitary(u: &ComplexMatrix, tol: f64) -> Result<UnitaryEigen> {
    if !is_unitary(u, tol)? {
        return Err(Error::NotUnitary);
    }
    let n = u.rows;
    if n > MAX_EIGEN_DIM {
        return Err(Error::TooLarge { dim: n, max: MAX_EIGEN_DIM });
    }
    let ud = u.adjoint();
    let herm = u.add(&ud).scale(c(0.5, 0.0));
    let skew = u.sub(&ud).scale(c(0.0, -0.5));

    let mut worst = f64::INFINITY;
    for &w in &MIXING_WEIGHTS {
        let combined = herm.add(&skew.scale(c(w, 0.0)));
        let eig = combined.to_nalgebra().symmetric_eigen();
        let mut pairs = Vec::with_capacity(n);
        let mut residual = 0.0f64;
        for k in 0..n {
            let mut v: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
            normalize_phase(&mut v);
            let uv = u.apply(&v);
            let lambda: C64 = v.iter().zip(&uv).map(|(a, b)| a.conj() * b).sum();
            let lambda = lambda / lambda.norm();
            let r = uv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lambda * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            residual = residual.max(r);
            pairs.push((wrap_phase(lambda.arg()), v));
        }
        if residual <= 10.0 * tol {
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (phases, vectors) = pairs.into_iter().unzip();
            return Ok(UnitaryEigen { phases, vectors });
        }
        worst = worst.min(residual);
    }
    Err(Error::NoConvergence { residual: worst })
}

/// Sorted eigenphases in `[0, 2π)`, multiplicities preserved.
pub fn eigenphases_unitary(u: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    eigen_unitary(u, tol).map(|e| e.phases)
}

/// Maps an angle into `[0, 2π)`, snapping values within 1e-12 of 2π to 0.
pub fn wrap_phase(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    if TAU - p < 1e-12 {
        0.0
    } else {
        p
    }
}

/// Rotates `v` so its largest-modulus entry is real and positive.
fn normalize_phase(v: &mut [C64]) {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::new(1.0, 0.0));
    if pivot.norm() > 0.0 {
        let rot = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

/// Normalized complex amplitude vector.
///
/// Simulator states have dimension 2^n; the discriminator routines also
/// produce vectors of arbitrary dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps amplitudes, rescaling them to unit norm.
    pub fn new(mut amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if amps.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        for z in amps.iter_mut() {
            *z /= norm;
        }
        Ok(Self { amps })
    }

    /// `|0…0⟩` on `n` qubits.
    pub fn zero_state(n_qubits: usize) -> Self {
        Self::basis(1 << n_qubits, 0)
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Number of qubits, if the dimension is a power of two.
    pub fn n_qubits(&self) -> Option<usize> {
        let d = self.amps.len();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `⟨self|M|self⟩`.
    pub fn expectation(&self, m: &ComplexMatrix) -> Result<C64> {
        if m.cols() != self.dim() || !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.cols(),
            });
        }
        let mv = m.apply(&self.amps);
        Ok(self.amps.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum())
    }

    /// `M|self⟩`; `m` must be unitary for the result to stay normalized.
    pub fn evolve(&self, m: &ComplexMatrix) -> Result<Self> {
        if m.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.cols(),
            });
        }
        Self::new(m.apply(&self.amps))
    }

    /// Born probabilities of computational basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Wraps an angle difference into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn rz(phi: f64) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[cis(-phi / 2.0), cis(phi / 2.0)])
    }

    fn z() -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)])
    }

    #[test]
    fn kron_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_z_z() {
        let zz = kron(&z(), &z());
        let expected = ComplexMatrix::from_diagonal(&[
            c(1.0, 0.0),
            c(-1.0, 0.0),
            c(-1.0, 0.0),
            c(1.0, 0.0),
        ]);
        assert_eq!(zz, expected);
    }

    #[test]
    fn kron_rz_pair() {
        let phi = PI / 6.0;
        let out = kron(&rz(phi), &rz(phi));
        // (e^{-iφ/2}, e^{iφ/2}) ⊗ (e^{-iφ/2}, e^{iφ/2}) phases: -φ, 0, 0, +φ.
        let expected = ComplexMatrix::from_diagonal(&[
            cis(-PI / 6.0),
            c(1.0, 0.0),
            c(1.0, 0.0),
            cis(PI / 6.0),
        ]);
        assert!(out.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn kron_layout_non_square() {
        let a = ComplexMatrix::new(1, 2, vec![c(1.0, 0.0), c(2.0, 0.0)]);
        let b = ComplexMatrix::new(2, 1, vec![c(3.0, 0.0), c(5.0, 0.0)]);
        let out = kron(&a, &b);
        assert_eq!((out.rows(), out.cols()), (2, 2));
        let re: Vec<f64> = out.entries().iter().map(|z| z.re).collect();
        assert_eq!(re, vec![3.0, 6.0, 5.0, 10.0]);
    }

    #[test]
    fn eigenphases_rz() {
        let phases = eigenphases_unitary(&rz(PI / 6.0), 1e-9).unwrap();
        assert_abs_diff_eq!(phases[0], PI / 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(phases[1], TAU - PI / 12.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenphases_identity() {
        let phases = eigenphases_unitary(&ComplexMatrix::identity(4), 1e-9).unwrap();
        assert_eq!(phases, vec![0.0; 4]);
    }

    #[test]
    fn eigenphases_hadamard() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = ComplexMatrix::from_2x2(c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0));
        let phases = eigenphases_unitary(&h, 1e-9).unwrap();
        assert_abs_diff_eq!(phases[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(phases[1], PI, epsilon = 1e-12);
    }

    #[test]
    fn eigen_rejects_non_unitary() {
        let m = ComplexMatrix::identity(2).scale(c(2.0, 0.0));
        assert!(matches!(eigenphases_unitary(&m, 1e-9), Err(Error::NotUnitary)));
    }

    #[test]
    fn unitary_predicate() {
        assert!(is_unitary(&ComplexMatrix::identity(2), 1e-10).unwrap());
        let two = ComplexMatrix::identity(2).scale(c(2.0, 0.0));
        assert!(!is_unitary(&two, 1e-10).unwrap());
        let sx = ComplexMatrix::from_2x2(
            c(0.5, 0.5),
            c(0.5, -0.5),
            c(0.5, -0.5),
            c(0.5, 0.5),
        );
        assert!(is_unitary(&sx, 1e-12).unwrap());
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(is_unitary(&rect, 1e-9), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn state_normalizes() {
        let s = StateVector::new(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);
        assert!(StateVector::new(vec![c(0.0, 0.0)]).is_err());
        assert_eq!(s.n_qubits(), Some(1));
    }

    #[test]
    fn pow_matches_repeated_product() {
        let m = rz(0.3);
        let p = m.pow(5);
        assert!(p.max_abs_diff(&rz(1.5)) < 1e-14);
        assert_eq!(m.pow(0), ComplexMatrix::identity(2));
    }
}
