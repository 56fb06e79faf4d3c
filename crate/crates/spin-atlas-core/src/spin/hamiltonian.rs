use alloc::vec::Vec;

use super::operators::{accumulate_product, spin_operators};
use super::spec::SpinSystemSpec;
use crate::linalg::{HermitianMatrix, Mat3, Matrix, C64};
use crate::{Error, Result};

/// H(B, D) = fixed + D·zfs + B·zeeman, assembled once per spec.
///
/// The field enters only through the Zeeman part and D only through the NV
/// axial term, so a sweep costs one O(n²) combination per grid point.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    dims: Vec<usize>,
    fixed: Matrix,
    zfs: Matrix,
    zeeman: Matrix,
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn local_ops(mult: usize) -> [Matrix; 3] {
    let s = spin_operators(mult).expect("species multiplicity is 2 or 3");
    [s.x.into_matrix(), s.y.into_matrix(), s.z.into_matrix()]
}

/// Σ_a c_a S_a for a lab-frame vector c.
fn project(ops: &[Matrix; 3], c: [f64; 3]) -> Matrix {
    let mut m = Matrix::zeros(ops[0].dim());
    for (op, &w) in ops.iter().zip(&c) {
        if w != 0.0 {
            m.add_scaled(op, real(w));
        }
    }
    m
}

/// Σ_ab T_ab A_a B_b for local operator sets on one spin.
fn quadratic_local(ops: &[Matrix; 3], t: &Mat3) -> Matrix {
    let mut m = Matrix::zeros(ops[0].dim());
    for a in 0..3 {
        for b in 0..3 {
            if t[(a, b)] != 0.0 {
                m.add_scaled(&ops[a].matmul(&ops[b]), real(t[(a, b)]));
            }
        }
    }
    m
}

impl HamiltonianTerms {
    /// Assemble the field- and D-independent pieces of the cluster Hamiltonian.
    pub fn new(spec: &SpinSystemSpec) -> Result<Self> {
        let dims = spec.dims();
        let n: usize = dims.iter().product();
        let mut fixed = Matrix::zeros(n);
        let mut zfs = Matrix::zeros(n);
        let mut zeeman = Matrix::zeros(n);
        let ops: Vec<[Matrix; 3]> = dims.iter().map(|&d| local_ops(d)).collect();

        for (k, site) in spec.sites().iter().enumerate() {
            let o = &ops[k];
            accumulate_product(&mut zeeman, &dims, &[(k, &o[2])], real(site.species.gyromagnetic_ratio));

            if let Some(z) = site.zfs {
                let r = site.axis.rotation();
                let sx = project(o, r.column(0).0);
                let sy = project(o, r.column(1).0);
                let sz = project(o, r.column(2).0);
                let sz2 = sz.matmul(&sz);
                let mut strain = Matrix::zeros(3);
                strain.add_scaled(&sz2, real(z.d_parallel));
                strain.add_scaled(&sx.matmul(&sx), real(z.d_x));
                strain.add_scaled(&sy.matmul(&sy), real(-z.d_x));
                strain.add_scaled(&sx.matmul(&sy), real(z.d_y));
                strain.add_scaled(&sy.matmul(&sx), real(z.d_y));
                accumulate_product(&mut fixed, &dims, &[(k, &strain)], real(1.0));
                match z.d {
                    Some(d) => accumulate_product(&mut fixed, &dims, &[(k, &sz2)], real(d)),
                    None => accumulate_product(&mut zfs, &dims, &[(k, &sz2)], real(1.0)),
                }
            }

            if let Some(q) = site.quadrupole {
                let local = quadratic_local(o, &q.lab());
                accumulate_product(&mut fixed, &dims, &[(k, &local)], real(1.0));
            }

            if let Some(hf) = site.hyperfine {
                add_bilinear(&mut fixed, &dims, &ops, hf.electron, k, &hf.tensor.lab());
            }
        }
        for c in spec.couplings() {
            add_bilinear(&mut fixed, &dims, &ops, c.site_a, c.site_b, &c.tensor.lab());
        }
        Ok(HamiltonianTerms { dims, fixed, zfs, zeeman })
    }

    /// Per-site multiplicities.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Composite dimension.
    pub fn dimension(&self) -> usize {
        self.fixed.dim()
    }

    /// H at axial field `b` (G) and zero-field splitting `d` (MHz).
    pub fn at(&self, b: f64, d: f64) -> HermitianMatrix {
        let mut h = self.fixed.clone();
        let (f, z) = (self.zeeman.as_slice(), self.zfs.as_slice());
        for (i, v) in h.as_mut_slice().iter_mut().enumerate() {
            *v += f[i] * b + z[i] * d;
        }
        HermitianMatrix::from_matrix_unchecked(h)
    }

    /// The fixed, D and B coefficient matrices.
    pub fn parts(&self) -> [&Matrix; 3] {
        [&self.fixed, &self.zfs, &self.zeeman]
    }

    /// Whether every term commutes with the basis permutation `perm`.
    pub fn invariant_under(&self, perm: &[usize]) -> bool {
        let n = self.dimension();
        self.parts().into_iter().all(|m| {
            let scale = 1e-10 * (1.0 + m.max_abs());
            let tol = scale * scale;
            (0..n).all(|i| (0..n).all(|j| (m[(perm[i], perm[j])] - m[(i, j)]).norm_sqr() <= tol))
        })
    }

    /// Connectivity pattern: entry (i, j) can be non-zero for some (B, D).
    pub fn coupled(&self, i: usize, j: usize) -> bool {
        let zero = C64::new(0.0, 0.0);
        self.fixed[(i, j)] != zero || self.zfs[(i, j)] != zero || self.zeeman[(i, j)] != zero
    }
}

fn add_bilinear(target: &mut Matrix, dims: &[usize], ops: &[[Matrix; 3]], a: usize, b: usize, t: &Mat3) {
    for x in 0..3 {
        for y in 0..3 {
            if t[(x, y)] != 0.0 {
                accumulate_product(target, dims, &[(a, &ops[a][x]), (b, &ops[b][y])], real(t[(x, y)]));
            }
        }
    }
}

/// Build the cluster Hamiltonian at axial field `b` (G, along lab z) with
/// zero-field splitting `d` (MHz).
pub fn build_hamiltonian(spec: &SpinSystemSpec, b: f64, d: f64) -> Result<HermitianMatrix> {
    if !(b >= 0.0) || !b.is_finite() {
        return Err(Error::InvalidParameter("field must be finite and non-negative".into()));
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter("zero-field splitting must be positive".into()));
    }
    Ok(HamiltonianTerms::new(spec)?.at(b, d))
}
