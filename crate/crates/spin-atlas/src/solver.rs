//! faer-backed Hermitian eigensolver.

#![cfg(feature = "faer")]

use faer::{Mat, Side};
use spin_atlas_core::eigen::{Eigen, EigenSolver};
use spin_atlas_core::linalg::{HermitianMatrix, C64, HERMITIAN_TOL};
use spin_atlas_core::{Error, Result};

/// Dense self-adjoint eigensolver from faer. Real matrices take the real
/// symmetric path.
#[derive(Debug, Clone, Copy, Default)]
pub struct FaerSolver;

fn check(h: &HermitianMatrix) -> Result<()> {
    let err = h.as_matrix().hermiticity_error();
    if !(err < HERMITIAN_TOL) {
        return Err(Error::NotHermitian(err));
    }
    Ok(())
}

fn real(h: &HermitianMatrix) -> Mat<f64> {
    let n = h.dim();
    Mat::from_fn(n, n, |i, j| h[(i, j)].re)
}

fn complex(h: &HermitianMatrix) -> Mat<faer::c64> {
    let n = h.dim();
    Mat::from_fn(n, n, |i, j| {
        let z = h[(i, j)];
        faer::c64::new(z.re, z.im)
    })
}

impl EigenSolver for FaerSolver {
    fn eigh(&self, h: &HermitianMatrix) -> Result<Eigen> {
        check(h)?;
        let n = h.dim();
        let mut values = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * n);
        if h.is_real(0.0) {
            let e = real(h).self_adjoint_eigen(Side::Lower).map_err(|_| Error::NoConvergence)?;
            let (s, u) = (e.S().column_vector(), e.U());
            for k in 0..n {
                values.push(s[k]);
                vectors.extend((0..n).map(|i| C64::new(u[(i, k)], 0.0)));
            }
        } else {
            let e = complex(h).self_adjoint_eigen(Side::Lower).map_err(|_| Error::NoConvergence)?;
            let (s, u) = (e.S().column_vector(), e.U());
            for k in 0..n {
                values.push(s[k].re);
                vectors.extend((0..n).map(|i| {
                    let z = u[(i, k)];
                    C64::new(z.re, z.im)
                }));
            }
        }
        Ok(Eigen { values, vectors })
    }

    fn eigvalsh(&self, h: &HermitianMatrix) -> Result<Vec<f64>> {
        check(h)?;
        if h.is_real(0.0) {
            real(h).self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::NoConvergence)
        } else {
            complex(h).self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::NoConvergence)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use spin_atlas_core::eigen::NativeSolver;
    use spin_atlas_core::linalg::Matrix;

    #[test]
    fn agrees_with_native_on_complex_matrix() {
        let m = Matrix::from_fn(5, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let im = if i < j { 0.3 * (a - b) } else if i > j { -0.3 * (a - b) } else { 0.0 };
            C64::new(1.0 / (1.0 + a + b), im)
        });
        let h = HermitianMatrix::new(m).unwrap();
        let f = FaerSolver.eigh(&h).unwrap();
        let n = NativeSolver.eigh(&h).unwrap();
        for (a, b) in f.values.iter().zip(&n.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(FaerSolver.eigvalsh(&h).unwrap().len(), 5);
    }
}
