use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::eigen::{EigenSolver, NativeSolver};
use crate::linalg::{HermitianMatrix, Matrix, C64};
use crate::math;
use crate::spin::{swap_permutation, Unit};

/// Sparse basis vector as (basis index, coefficient) pairs.
pub(crate) type Column = Vec<(usize, C64)>;

/// Largest label weight before giving up on the decomposition.
const MAX_WEIGHT: f64 = 1e9;

/// Exchange-symmetry sectors, or `None` when there is nothing to exchange.
///
/// A sector is a joint eigenspace of the Jucys-Murphy elements
/// X_j = Σ_{i<j} (i j) of every class. Anything that commutes with unit
/// exchange is block diagonal across sectors. Basis vectors are built orbit
/// by orbit, so each one is supported on a single orbit of basis states.
pub(crate) fn exchange_sectors(dims: &[usize], classes: &[Vec<Unit>]) -> Option<Vec<Vec<Column>>> {
    let n: usize = dims.iter().product();
    // the content of box j lies in [-(j-1), j-1]; weights form a balanced
    // mixed radix so a joint eigenvalue decodes to a unique label
    let mut elements: Vec<(f64, Vec<Vec<usize>>)> = Vec::new();
    let mut weight = 1.0;
    for c in classes {
        for j in 1..c.len() {
            elements.push((weight, (0..j).map(|i| swap_permutation(dims, &c[i], &c[j])).collect()));
            weight *= (2 * j + 1) as f64;
        }
    }
    if elements.is_empty() || weight > MAX_WEIGHT {
        return None;
    }
    let mut seen = vec![false; n];
    let mut pos = vec![0usize; n];
    let mut sectors: BTreeMap<i64, Vec<Column>> = BTreeMap::new();
    for g in 0..n {
        if seen[g] {
            continue;
        }
        seen[g] = true;
        let mut orbit = vec![g];
        let mut t = 0;
        while t < orbit.len() {
            for (_, perms) in &elements {
                for p in perms {
                    let y = p[orbit[t]];
                    if !seen[y] {
                        seen[y] = true;
                        orbit.push(y);
                    }
                }
            }
            t += 1;
        }
        for (t, &x) in orbit.iter().enumerate() {
            pos[x] = t;
        }
        let mut a = Matrix::zeros(orbit.len());
        for (w, perms) in &elements {
            for p in perms {
                for (t, &x) in orbit.iter().enumerate() {
                    a[(pos[p[x]], t)] += C64::new(*w, 0.0);
                }
            }
        }
        let e = NativeSolver.eigh(&HermitianMatrix::from_matrix_unchecked(a)).ok()?;
        for (i, &lam) in e.values.iter().enumerate() {
            let label = math::round(lam);
            if (lam - label).abs() > 1e-6 {
                return None;
            }
            let col: Column =
                orbit.iter().zip(e.vector(i)).filter(|(_, v)| v.norm_sqr() > 1e-28).map(|(&x, &v)| (x, v)).collect();
            sectors.entry(label as i64).or_default().push(col);
        }
    }
    Some(sectors.into_values().collect())
}

/// ⟨a|M|b⟩ for every pair of sparse columns.
pub(crate) fn project(m: &Matrix, cols: &[Column]) -> Matrix {
    Matrix::from_fn(cols.len(), |a, b| {
        let mut acc = C64::new(0.0, 0.0);
        for &(i, x) in &cols[a] {
            for &(j, y) in &cols[b] {
                acc += x.conj() * m[(i, j)] * y;
            }
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthonormal(cols: &[Column], n: usize) {
        let dense: Vec<Vec<C64>> = cols
            .iter()
            .map(|c| {
                let mut v = vec![C64::new(0.0, 0.0); n];
                for &(i, x) in c {
                    v[i] = x;
                }
                v
            })
            .collect();
        for (a, u) in dense.iter().enumerate() {
            for (b, v) in dense.iter().enumerate() {
                let dot: C64 = u.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - C64::new(want, 0.0)).norm_sqr() < 1e-20);
            }
        }
    }

    #[test]
    fn three_qubits_split_by_young_tableau() {
        let dims = [2, 2, 2];
        let classes = vec![vec![vec![0], vec![1], vec![2]]];
        let s = exchange_sectors(&dims, &classes).unwrap();
        let mut sizes: Vec<usize> = s.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        // symmetric quartet, two copies of the mixed doublet
        assert_eq!(sizes, vec![2, 2, 4]);
        let all: Vec<Column> = s.into_iter().flatten().collect();
        assert_eq!(all.len(), 8);
        orthonormal(&all, 8);
    }

    #[test]
    fn nothing_to_exchange() {
        assert!(exchange_sectors(&[3, 2], &[]).is_none());
    }
}
