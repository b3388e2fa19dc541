//! Superoperators on the system algebra, stored as n^2 x n^2 matrices under
//! column-stacking vectorization: vec(X)[i + n j] = X[i, j], so the map
//! X -> A X B has matrix B^T ⊗ A.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::eig::hermitian_eigen;
use crate::numerics::matrix::{kron, operator_norm, ComplexMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

pub fn vec_stack(x: &ComplexMatrix) -> Vec<Complex64> {
    let n = x.rows();
    let mut v = Vec::with_capacity(n * x.cols());
    for j in 0..x.cols() {
        for i in 0..n {
            v.push(x[(i, j)]);
        }
    }
    v
}

pub fn unvec_stack(v: &[Complex64], n: usize) -> ComplexMatrix {
    assert_eq!(v.len(), n * n, "unvec length mismatch");
    ComplexMatrix::from_fn(n, n, |i, j| v[i + n * j])
}

impl Superoperator {
    pub fn zeros(dim: usize) -> Self {
        Superoperator { dim, matrix: ComplexMatrix::zeros(dim * dim, dim * dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Superoperator { dim, matrix: ComplexMatrix::identity(dim * dim) }
    }

    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != dim * dim || matrix.cols() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "superoperator matrix must be {0}x{0}",
                dim * dim
            )));
        }
        Ok(Superoperator { dim, matrix })
    }

    /// The map X -> a X b.
    pub fn conjugation(a: &ComplexMatrix, b: &ComplexMatrix) -> Self {
        assert!(a.is_square() && b.is_square() && a.rows() == b.rows());
        Superoperator { dim: a.rows(), matrix: kron(&b.transpose(), a) }
    }

    /// The map X -> a X.
    pub fn left_mult(a: &ComplexMatrix) -> Self {
        Self::conjugation(a, &ComplexMatrix::identity(a.rows()))
    }

    /// The map X -> X b.
    pub fn right_mult(b: &ComplexMatrix) -> Self {
        Self::conjugation(&ComplexMatrix::identity(b.rows()), b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn add(&self, other: &Superoperator) -> Self {
        assert_eq!(self.dim, other.dim);
        Superoperator { dim: self.dim, matrix: &self.matrix + &other.matrix }
    }

    pub fn sub(&self, other: &Superoperator) -> Self {
        assert_eq!(self.dim, other.dim);
        Superoperator { dim: self.dim, matrix: &self.matrix - &other.matrix }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Superoperator { dim: self.dim, matrix: self.matrix.scale(c) }
    }

    /// Composition self ∘ other.
    pub fn compose(&self, other: &Superoperator) -> Self {
        assert_eq!(self.dim, other.dim);
        Superoperator { dim: self.dim, matrix: self.matrix.matmul(&other.matrix) }
    }

    /// n-fold iterate by binary exponentiation.
    pub fn pow(&self, n: usize) -> Self {
        let mut result = Superoperator::identity(self.dim);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.compose(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.compose(&base);
            }
        }
        result
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.rows(), self.dim);
        assert_eq!(x.cols(), self.dim);
        unvec_stack(&self.matrix.matvec(&vec_stack(x)), self.dim)
    }

    /// Spectral norm of the superoperator matrix.
    pub fn spectral_norm(&self) -> f64 {
        operator_norm(&self.matrix)
    }

    /// Choi matrix: C[(k n + i), (l n + j)] = S[(i + n j), (k + n l)].
    /// For a Hermiticity-preserving map this is Hermitian, and the map is
    /// completely positive iff C is positive semidefinite.
    pub fn choi(&self) -> ComplexMatrix {
        let n = self.dim;
        ComplexMatrix::from_fn(n * n, n * n, |r, c| {
            let (k, i) = (r / n, r % n);
            let (l, j) = (c / n, c % n);
            self.matrix[(i + n * j, k + n * l)]
        })
    }

    /// Smallest eigenvalue of the Hermitized Choi matrix.
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        let c = self.choi();
        let herm = (&c + &c.adjoint()).scale(Complex64::new(0.5, 0.0));
        let (eigs, _) = hermitian_eigen(&herm)?;
        Ok(eigs.first().copied().unwrap_or(0.0))
    }

    /// Whether the map fixes the identity matrix within `tol` (max entry).
    pub fn is_unital_within(&self, tol: f64) -> bool {
        let id = ComplexMatrix::identity(self.dim);
        (&self.apply(&id) - &id).max_abs() <= tol
    }
}
