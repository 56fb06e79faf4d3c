//! Dense Hermitian eigensolvers and block decomposition.

mod blocks;
mod native;

use alloc::vec::Vec;

pub use blocks::BlockPlan;

use crate::linalg::{HermitianMatrix, C64, HERMITIAN_TOL};
use crate::{Error, Result};

/// Eigenpairs of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored one after another (vector `i` occupies
    /// `vectors[i*n..(i+1)*n]`).
    pub vectors: Vec<C64>,
}

impl Eigen {
    /// Dimension.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvector `i`.
    pub fn vector(&self, i: usize) -> &[C64] {
        let n = self.dim();
        &self.vectors[i * n..(i + 1) * n]
    }
}

/// A dense Hermitian eigensolver. Implementations must be reentrant.
pub trait EigenSolver: Sync {
    /// Eigenvalues (ascending) and orthonormal eigenvectors.
    fn eigh(&self, h: &HermitianMatrix) -> Result<Eigen>;

    /// Eigenvalues only, ascending.
    fn eigvalsh(&self, h: &HermitianMatrix) -> Result<Vec<f64>> {
        Ok(self.eigh(h)?.values)
    }
}

impl<S: EigenSolver + ?Sized> EigenSolver for &S {
    fn eigh(&self, h: &HermitianMatrix) -> Result<Eigen> {
        (**self).eigh(h)
    }
    fn eigvalsh(&self, h: &HermitianMatrix) -> Result<Vec<f64>> {
        (**self).eigvalsh(h)
    }
}

/// Pure-Rust Householder + implicit QL solver. Takes a real path when the
/// matrix has no imaginary part.
#[derive(Debug, Clone, Copy, Default)]
pub struct NativeSolver;

fn check(h: &HermitianMatrix) -> Result<()> {
    let err = h.as_matrix().hermiticity_error();
    if !(err < HERMITIAN_TOL) {
        return Err(Error::NotHermitian(err));
    }
    Ok(())
}

impl EigenSolver for NativeSolver {
    fn eigh(&self, h: &HermitianMatrix) -> Result<Eigen> {
        check(h)?;
        let (values, vectors) = native::solve(h, true)?;
        Ok(Eigen { values, vectors })
    }

    fn eigvalsh(&self, h: &HermitianMatrix) -> Result<Vec<f64>> {
        check(h)?;
        Ok(native::solve(h, false)?.0)
    }
}

/// Eigendecomposition with the native solver.
pub fn eigendecompose(h: &HermitianMatrix) -> Result<Eigen> {
    NativeSolver.eigh(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn diagonal_sorted() {
        let e = eigendecompose(&HermitianMatrix::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_x() {
        let m = Matrix::from_fn(2, |i, j| C64::new(if i != j { 1.0 } else { 0.0 }, 0.0));
        let e = eigendecompose(&HermitianMatrix::new(m).unwrap()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        let v0 = e.vector(0);
        // (1, -1)/√2 up to a global phase
        assert!((v0[0] + v0[1]).norm_sqr() < 1e-30);
        assert!((v0[0].norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Matrix::from_fn(2, |i, j| C64::new(0.0, if i < j { 1.0 } else { 0.0 }));
        let h = HermitianMatrix::from_matrix_unchecked(m);
        assert!(matches!(NativeSolver.eigh(&h), Err(Error::NotHermitian(_))));
    }
}
