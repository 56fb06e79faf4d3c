//! Small dense linear algebra: 3-vectors, 3×3 real matrices and square complex matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::{math, Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// A real 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    /// Lab z.
    pub const Z: Vec3 = Vec3([0.0, 0.0, 1.0]);

    /// Build from components.
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    /// Dot product.
    pub fn dot(self, o: Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    /// Cross product.
    pub fn cross(self, o: Vec3) -> Vec3 {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        Vec3([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    /// Euclidean norm.
    pub fn norm(self) -> f64 {
        math::sqrt(self.dot(self))
    }

    /// Unit vector in the same direction.
    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        Vec3([self.0[0] / n, self.0[1] / n, self.0[2] / n])
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

/// Real 3×3 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    /// Identity.
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Diagonal matrix.
    pub const fn diag(a: f64, b: f64, c: f64) -> Mat3 {
        Mat3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    /// Transpose.
    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    /// Matrix product.
    pub fn matmul(&self, o: &Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(r)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3([
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ])
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec3 {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    /// Largest |m_ij − m_ji|.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.0;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((m[i][j] - m[j][i]).abs());
            }
        }
        worst
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Rotation taking lab z onto the unit vector `axis` (Rodrigues form).
    ///
    /// For `axis = -z` the rotation by π about x is used.
    pub fn rotation_from_z(axis: Vec3) -> Mat3 {
        let z = Vec3::Z;
        let v = z.cross(axis);
        let c = z.dot(axis);
        if v.norm() < 1e-14 {
            return if c > 0.0 { Mat3::IDENTITY } else { Mat3::diag(1.0, -1.0, -1.0) };
        }
        let vx = Mat3([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]);
        let vx2 = vx.matmul(&vx);
        let k = 1.0 / (1.0 + c);
        let mut r = Mat3::IDENTITY.0;
        for i in 0..3 {
            for j in 0..3 {
                r[i][j] += vx.0[i][j] + vx2.0[i][j] * k;
            }
        }
        Mat3(r)
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

/// Square complex matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<C64>,
}

impl Matrix {
    /// n×n zeros.
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![C64::new(0.0, 0.0); n * n] }
    }

    /// n×n identity.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    /// Mutable row-major entries.
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// Matrix product.
    pub fn matmul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.n, o.n, "dimension mismatch");
        let n = self.n;
        let mut r = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    r.data[i * n + j] += a * o.data[k * n + j];
                }
            }
        }
        r
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    /// `self + s·o`.
    pub fn add_scaled(&mut self, o: &Matrix, s: C64) {
        assert_eq!(self.n, o.n, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            *a += *b * s;
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        math::sqrt(self.data.iter().fold(0.0f64, |a, v| a.max(v.norm_sqr())))
    }

    /// Largest |m_ij − conj(m_ji)|.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm_sqr());
            }
        }
        math::sqrt(worst)
    }

    /// Trace.
    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

/// Tolerance used when validating Hermiticity of inputs, MHz.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// A complex Hermitian matrix in MHz.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(Matrix);

impl HermitianMatrix {
    /// n×n zeros.
    pub fn zeros(n: usize) -> Self {
        HermitianMatrix(Matrix::zeros(n))
    }

    /// Wrap a matrix after checking ‖M − M†‖_max < 1e-9.
    pub fn new(m: Matrix) -> Result<Self> {
        let err = m.hermiticity_error();
        if !(err < HERMITIAN_TOL) {
            return Err(Error::NotHermitian(err));
        }
        Ok(HermitianMatrix(m))
    }

    /// Wrap without checking. Callers guarantee Hermiticity.
    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        HermitianMatrix(m)
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        HermitianMatrix(m)
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.0.n
    }

    /// Underlying matrix.
    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    /// Consume into the underlying matrix.
    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `self + s·o` with real `s` (stays Hermitian).
    pub fn add_scaled(&mut self, o: &HermitianMatrix, s: f64) {
        self.0.add_scaled(&o.0, C64::new(s, 0.0));
    }

    /// Add `s` to every diagonal element.
    pub fn shift_diagonal(&mut self, s: f64) {
        for i in 0..self.0.n {
            self.0[(i, i)].re += s;
        }
    }

    /// True when every imaginary part is below `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.0.data.iter().all(|v| v.im.abs() <= tol)
    }

    /// Sub-matrix on the given (sorted) index set.
    pub fn submatrix(&self, idx: &[usize]) -> HermitianMatrix {
        HermitianMatrix(Matrix::from_fn(idx.len(), |i, j| self.0[(idx[i], idx[j])]))
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = C64;
    fn index(&self, ij: (usize, usize)) -> &C64 {
        &self.0[ij]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_maps_z_to_axis() {
        let axes = [
            Vec3::new(8f64.sqrt() / 3.0, 0.0, -1.0 / 3.0),
            Vec3::new(0.3, -0.4, 0.5).normalized(),
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::Z,
        ];
        for a in axes {
            let r = Mat3::rotation_from_z(a);
            let img = r.apply(Vec3::Z);
            assert!((img - a).norm() < 1e-14);
            let rrt = r.matmul(&r.transpose());
            for i in 0..3 {
                for j in 0..3 {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((rrt[(i, j)] - e).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn hermitian_check_rejects_asymmetric() {
        let m = Matrix::from_fn(2, |i, j| C64::new((i + 2 * j) as f64, 0.0));
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian(_))));
    }
}
