use alloc::vec::Vec;

use crate::linalg::{HermitianMatrix, Matrix, C64};
use crate::{math, Error, Result};

/// Cartesian spin operators for one spin, basis ordered m = +S … −S.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    /// S_x.
    pub x: HermitianMatrix,
    /// S_y.
    pub y: HermitianMatrix,
    /// S_z.
    pub z: HermitianMatrix,
}

impl SpinOperators {
    /// The three components as an array.
    pub fn components(&self) -> [&HermitianMatrix; 3] {
        [&self.x, &self.y, &self.z]
    }
}

/// Spin matrices for multiplicity 2 (S = 1/2) or 3 (S = 1).
pub fn spin_operators(multiplicity: usize) -> Result<SpinOperators> {
    if !(2..=3).contains(&multiplicity) {
        return Err(Error::UnsupportedMultiplicity(multiplicity));
    }
    let s = (multiplicity as f64 - 1.0) / 2.0;
    let m: Vec<f64> = (0..multiplicity).map(|k| s - k as f64).collect();
    let zero = C64::new(0.0, 0.0);
    // S+ |m⟩ = sqrt(S(S+1) − m(m+1)) |m+1⟩, row k-1 col k
    let mut plus = Matrix::zeros(multiplicity);
    for k in 1..multiplicity {
        plus[(k - 1, k)] = C64::new(math::sqrt(s * (s + 1.0) - m[k] * (m[k] + 1.0)), 0.0);
    }
    let minus = plus.adjoint();
    let x = Matrix::from_fn(multiplicity, |i, j| (plus[(i, j)] + minus[(i, j)]) * 0.5);
    let y = Matrix::from_fn(multiplicity, |i, j| (plus[(i, j)] - minus[(i, j)]) * C64::new(0.0, -0.5));
    let z = Matrix::from_fn(multiplicity, |i, j| if i == j { C64::new(m[i], 0.0) } else { zero });
    Ok(SpinOperators {
        x: HermitianMatrix::from_matrix_unchecked(x),
        y: HermitianMatrix::from_matrix_unchecked(y),
        z: HermitianMatrix::from_matrix_unchecked(z),
    })
}

/// Kronecker strides for `dims` with slot 0 most significant.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut st = alloc::vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        st[k] = st[k + 1] * dims[k + 1];
    }
    st
}

/// Add `coeff · (⊗_k F_k)` to `target`, where each factor acts on one slot and
/// all other slots carry the identity. Slots must be distinct.
pub(crate) fn accumulate_product(target: &mut Matrix, dims: &[usize], factors: &[(usize, &Matrix)], coeff: C64) {
    let st = strides(dims);
    let n = target.dim();
    // nonzero entries of each factor, grouped by row
    let nz: Vec<Vec<Vec<(usize, C64)>>> = factors
        .iter()
        .map(|(_, f)| {
            (0..f.dim())
                .map(|i| (0..f.dim()).filter(|&j| f[(i, j)] != C64::new(0.0, 0.0)).map(|j| (j, f[(i, j)])).collect())
                .collect()
        })
        .collect();
    for r in 0..n {
        accumulate_row(target, r, r, coeff, &st, dims, factors, &nz, 0);
    }
}

#[allow(clippy::too_many_arguments)]
fn accumulate_row(
    target: &mut Matrix,
    row: usize,
    col: usize,
    value: C64,
    st: &[usize],
    dims: &[usize],
    factors: &[(usize, &Matrix)],
    nz: &[Vec<Vec<(usize, C64)>>],
    depth: usize,
) {
    if depth == factors.len() {
        target[(row, col)] += value;
        return;
    }
    let slot = factors[depth].0;
    let d = (row / st[slot]) % dims[slot];
    for &(c, a) in &nz[depth][d] {
        let col2 = col + c * st[slot] - d * st[slot];
        accumulate_row(target, row, col2, value * a, st, dims, factors, nz, depth + 1);
    }
}

/// Embed a single-spin operator into the composite space: I ⊗ … ⊗ op ⊗ … ⊗ I.
pub fn embed(op: &HermitianMatrix, slot: usize, dims: &[usize]) -> Result<HermitianMatrix> {
    if slot >= dims.len() {
        return Err(Error::SiteOutOfRange { index: slot, len: dims.len() });
    }
    if op.dim() != dims[slot] {
        return Err(Error::DimensionMismatch { op: op.dim(), slot: dims[slot] });
    }
    let n: usize = dims.iter().product();
    let mut out = Matrix::zeros(n);
    accumulate_product(&mut out, dims, &[(slot, op.as_matrix())], C64::new(1.0, 0.0));
    Ok(HermitianMatrix::from_matrix_unchecked(out))
}
