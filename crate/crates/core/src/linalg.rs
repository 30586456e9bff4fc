//! Dense complex linear algebra: matrices, Hermitian operators and their
//! cached eigensystems.
//!
//! Everything is dense. The largest Hilbert space the models produce is 100
//! (a two-level system coupled to a 50-level mode), so a `nalgebra` matrix
//! per operator is both simple and fast enough.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{SimError, SimResult};

pub type CVector = DVector<Complex64>;

/// Absolute tolerance on `‖M − M†‖_max` accepted when building a Hermitian
/// operator.
pub const HERMITIAN_TOL: f64 = 1e-10;

const EIG_MAX_ITER: usize = 100_000;

/// Square, finite, dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(inner: DMatrix<Complex64>) -> SimResult<Self> {
        let (rows, cols) = inner.shape();
        if rows == 0 || cols == 0 {
            return Err(SimError::Empty);
        }
        if rows != cols {
            return Err(SimError::NotSquare { rows, cols });
        }
        if !inner.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(SimError::NonFinite("matrix construction"));
        }
        Ok(Self(inner))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> SimResult<Self> {
        if entries.len() != dim * dim {
            return Err(SimError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> SimResult<Self> {
        let entries: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(dim, &entries)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        assert!(!diag.is_empty(), "matrix dimension must be positive");
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let diag: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&diag)
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &CVector, b: &CVector) -> SimResult<Self> {
        if a.len() != b.len() {
            return Err(SimError::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        Self::new(a * b.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `self · v`
    pub fn apply(&self, v: &CVector) -> SimResult<CVector> {
        self.check_vector(v)?;
        Ok(&self.0 * v)
    }

    /// `self† · v` without materializing the adjoint.
    pub fn apply_adjoint(&self, v: &CVector) -> SimResult<CVector> {
        self.check_vector(v)?;
        Ok(self.0.ad_mul(v))
    }

    pub fn checked_add(&self, other: &Self) -> SimResult<Self> {
        self.check_same(other)?;
        Ok(self + other)
    }

    pub fn checked_sub(&self, other: &Self) -> SimResult<Self> {
        self.check_same(other)?;
        Ok(self - other)
    }

    pub fn checked_mul(&self, other: &Self) -> SimResult<Self> {
        self.check_same(other)?;
        Ok(self * other)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn check_vector(&self, v: &CVector) -> SimResult<()> {
        if v.len() != self.dim() {
            return Err(SimError::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_same(&self, other: &Self) -> SimResult<()> {
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

// The operator impls panic on mismatched dimensions, like nalgebra itself.
// Use the `checked_*` methods at API boundaries.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Tensor product with `a` as the major (outer) index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// `ab − ba`
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> SimResult<ComplexMatrix> {
    a.check_same(b)?;
    Ok(&(a * b) - &(b * a))
}

/// Hilbert–Schmidt norm `√Tr(A†A)`.
pub fn hs_norm(a: &ComplexMatrix) -> f64 {
    a.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hilbert–Schmidt inner product `Tr(ab)` of two Hermitian matrices.
///
/// Only the real part is returned; for Hermitian arguments the imaginary part
/// vanishes up to rounding.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> SimResult<f64> {
    a.check_same(b)?;
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a.0[(i, k)] * b.0[(k, i)]).re;
        }
    }
    Ok(acc)
}

/// A labeled Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    label: String,
}

impl HermitianOperator {
    /// Accepts matrices within [`HERMITIAN_TOL`] of Hermitian and stores the
    /// symmetrized `(M + M†)/2`.
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> SimResult<Self> {
        let label = label.into();
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(SimError::NotHermitian { label, deviation });
        }
        let sym = (&matrix + &matrix.adjoint()).scale_real(0.5);
        Ok(Self { matrix: sym, label })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(factor),
            label: self.label.clone(),
        }
    }

    /// Sum of two Hermitian operators, labeled by the caller.
    pub fn sum(&self, other: &Self, label: impl Into<String>) -> SimResult<Self> {
        Ok(Self {
            matrix: self.matrix.checked_add(&other.matrix)?,
            label: label.into(),
        })
    }
}

/// Eigenvalues (ascending) and the unitary whose columns are the eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `diag(e^{−i e_k τ})`
    pub fn phases(&self, tau: f64) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * tau))
            .collect()
    }

    /// `V diag(e^{−i e_k τ}) V†`
    pub fn unitary(&self, tau: f64) -> ComplexMatrix {
        let v = self.vectors.as_matrix();
        let mut scaled = v.clone();
        for (k, ph) in self.phases(tau).into_iter().enumerate() {
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= ph);
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    /// `V diag(e) V†`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.vectors.as_matrix();
        let mut scaled = v.clone();
        for (k, &e) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= e);
        }
        ComplexMatrix(scaled * v.adjoint())
    }

    /// `e^{−iHτ} v` through the eigenbasis: two matrix-vector products.
    pub fn evolve_vector(&self, v: &CVector, tau: f64) -> SimResult<CVector> {
        let mut coeffs = self.vectors.apply_adjoint(v)?;
        for (c, ph) in coeffs.iter_mut().zip(self.phases(tau)) {
            *c *= ph;
        }
        self.vectors.apply(&coeffs)
    }

    /// `e^{−iHτ} ρ e^{iHτ}` through the eigenbasis.
    pub fn evolve_density(&self, rho: &ComplexMatrix, tau: f64) -> SimResult<ComplexMatrix> {
        self.vectors.check_same(rho)?;
        let v = self.vectors.as_matrix();
        let mut w = v.ad_mul(rho.as_matrix()) * v;
        let ph = self.phases(tau);
        let n = ph.len();
        for i in 0..n {
            for j in 0..n {
                w[(i, j)] *= ph[i] * ph[j].conj();
            }
        }
        Ok(ComplexMatrix(v * w * v.adjoint()))
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn eig_hermitian(h: &HermitianOperator) -> SimResult<EigenSystem> {
    let m = h.matrix().as_matrix().clone();
    let dim = m.nrows();
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, EIG_MAX_ITER)
        .ok_or(SimError::EigenNonConvergence)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if eigenvalues.iter().any(|e| !e.is_finite()) {
        return Err(SimError::EigenNonConvergence);
    }
    let mut vectors = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenSystem {
        eigenvalues,
        vectors: ComplexMatrix::new(vectors)?,
    })
}

/// Schatten-∞ norm: the largest absolute eigenvalue.
pub fn schatten_inf(h: &HermitianOperator) -> SimResult<f64> {
    let eig = eig_hermitian(h)?;
    Ok(schatten_inf_of(&eig))
}

pub(crate) fn schatten_inf_of(eig: &EigenSystem) -> f64 {
    eig.eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{sigma_x, sigma_y, sigma_z};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus_projector() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, &[0.5, 0.5, 0.5, 0.5]).unwrap()
    }

    fn minus_projector() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, &[0.5, -0.5, -0.5, 0.5]).unwrap()
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(matches!(
            ComplexMatrix::new(DMatrix::zeros(2, 3)),
            Err(SimError::NotSquare { .. })
        ));
        assert!(matches!(
            ComplexMatrix::from_real_rows(1, &[f64::NAN]),
            Err(SimError::NonFinite(_))
        ));
    }

    #[test]
    fn kron_identity_and_diagonal() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
        let zz = kron(&sigma_z(), &sigma_z());
        let diag: Vec<f64> = (0..4).map(|k| zz.get(k, k).re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn kron_x_on_first_factor_flips_major_bit() {
        let xi = kron(&sigma_x(), &ComplexMatrix::identity(2));
        let ket00 = CVector::from_vec(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        let out = xi.apply(&ket00).unwrap();
        // |10⟩ is index 2 with the first factor most significant
        assert_eq!(out[2], c(1.0, 0.0));
        assert_eq!(out.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn pauli_commutator() {
        let comm = commutator(&sigma_x(), &sigma_y()).unwrap();
        let expected = sigma_z().scale(c(0.0, 2.0));
        assert!((&comm - &expected).max_abs() < 1e-15);
        let a = sigma_x();
        assert_eq!(commutator(&a, &a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn commutator_z_with_plus_projector() {
        // |−⟩⟨+| − |+⟩⟨−| = [[0, 1], [−1, 0]]
        let comm = commutator(&sigma_z(), &plus_projector()).unwrap();
        let expected = ComplexMatrix::from_real_rows(2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!((&comm - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let err = commutator(&ComplexMatrix::identity(2), &ComplexMatrix::identity(4));
        assert!(matches!(err, Err(SimError::DimensionMismatch { .. })));
    }

    #[test]
    fn hs_norm_values() {
        assert_relative_eq!(hs_norm(&ComplexMatrix::identity(2)), 2f64.sqrt());
        assert_eq!(hs_norm(&ComplexMatrix::zeros(3)), 0.0);
        let m = &plus_projector().scale_real(2.0) - &minus_projector().scale_real(2.0);
        assert_relative_eq!(hs_norm(&m), 2.0 * 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn hs_inner_values() {
        let p = plus_projector();
        assert_relative_eq!(hs_inner(&p, &p).unwrap(), 1.0, epsilon = 1e-15);
        let zero = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let one = ComplexMatrix::from_real_diagonal(&[0.0, 1.0]);
        assert_eq!(hs_inner(&zero, &one).unwrap(), 0.0);
        let mixed = ComplexMatrix::identity(2).scale_real(0.5);
        assert_relative_eq!(hs_inner(&mixed, &mixed).unwrap(), 0.5);
    }

    #[test]
    fn hermitian_construction_symmetrizes_or_rejects() {
        let slightly_off = ComplexMatrix::from_rows(
            2,
            &[c(1.0, 0.0), c(0.0, 1.0 + 1e-12), c(0.0, -1.0), c(-1.0, 0.0)],
        )
        .unwrap();
        let h = HermitianOperator::new(slightly_off, "y-ish").unwrap();
        assert_eq!(h.matrix().hermitian_deviation(), 0.0);

        let bad = ComplexMatrix::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            HermitianOperator::new(bad, "bad"),
            Err(SimError::NotHermitian { .. })
        ));
    }

    #[test]
    fn eig_sorted_and_schatten() {
        let z = HermitianOperator::new(sigma_z(), "z").unwrap();
        let eig = eig_hermitian(&z).unwrap();
        assert_eq!(eig.eigenvalues(), &[-1.0, 1.0]);
        assert_relative_eq!(schatten_inf(&z).unwrap(), 1.0);
    }

    #[test]
    fn unitary_matches_evolve_vector() {
        let y = HermitianOperator::new(sigma_y(), "y").unwrap();
        let eig = eig_hermitian(&y).unwrap();
        let v = CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let direct = eig.unitary(0.37).apply(&v).unwrap();
        let fast = eig.evolve_vector(&v, 0.37).unwrap();
        assert!((direct - fast).norm() < 1e-14);
    }
}
