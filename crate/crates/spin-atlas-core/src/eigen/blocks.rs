use alloc::vec;
use alloc::vec::Vec;

use super::{Eigen, EigenSolver};
use crate::linalg::{HermitianMatrix, C64};
use crate::Result;

/// Partition of the basis into sets that the Hamiltonian never connects.
///
/// Clusters whose axes are all parallel to the field conserve total M_z and
/// fall apart into many small blocks; diagonalising those separately is exact
/// and far cheaper than one dense solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlan {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl BlockPlan {
    /// One block holding everything.
    pub fn single(n: usize) -> Self {
        BlockPlan { n, blocks: vec![(0..n).collect()] }
    }

    /// Connected components of the graph with an edge wherever `coupled(i, j)`.
    pub fn detect(n: usize, coupled: impl Fn(usize, usize) -> bool) -> Self {
        let mut parent: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for j in 0..i {
                if coupled(i, j) || coupled(j, i) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut label = vec![usize::MAX; n];
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            if label[r] == usize::MAX {
                label[r] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[label[r]].push(i);
        }
        BlockPlan { n, blocks }
    }

    /// Composite dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Index sets, each ascending, ordered by smallest member.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Size of the largest block.
    pub fn largest(&self) -> usize {
        self.blocks.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Eigenvalues of `h`, ascending.
    pub fn eigenvalues<S: EigenSolver + ?Sized>(&self, h: &HermitianMatrix, solver: &S) -> Result<Vec<f64>> {
        if self.blocks.len() == 1 {
            return solver.eigvalsh(h);
        }
        let mut all = Vec::with_capacity(self.n);
        for b in &self.blocks {
            if b.len() == 1 {
                all.push(h[(b[0], b[0])].re);
            } else {
                all.extend(solver.eigvalsh(&h.submatrix(b))?);
            }
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    /// Eigenvalues (ascending) together with `f(block, local_vector)` for each
    /// eigenvector, without forming full-length vectors.
    pub fn solve_map<S, F>(&self, h: &HermitianMatrix, solver: &S, mut f: F) -> Result<(Vec<f64>, Vec<f64>)>
    where
        S: EigenSolver + ?Sized,
        F: FnMut(&[usize], &[C64]) -> f64,
    {
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(self.n);
        for b in &self.blocks {
            if b.len() == 1 {
                pairs.push((h[(b[0], b[0])].re, f(b, &[C64::new(1.0, 0.0)])));
                continue;
            }
            let sub;
            let e = solver.eigh(if self.blocks.len() == 1 {
                h
            } else {
                sub = h.submatrix(b);
                &sub
            })?;
            for i in 0..e.dim() {
                pairs.push((e.values[i], f(b, e.vector(i))));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(pairs.into_iter().unzip())
    }

    /// Full eigendecomposition assembled from the blocks.
    pub fn solve<S: EigenSolver + ?Sized>(&self, h: &HermitianMatrix, solver: &S) -> Result<Eigen> {
        if self.blocks.len() == 1 {
            return solver.eigh(h);
        }
        let n = self.n;
        let mut cols: Vec<(f64, Vec<C64>)> = Vec::with_capacity(n);
        for b in &self.blocks {
            let e = solver.eigh(&h.submatrix(b))?;
            for i in 0..e.dim() {
                let mut v = vec![C64::new(0.0, 0.0); n];
                for (k, &g) in b.iter().enumerate() {
                    v[g] = e.vector(i)[k];
                }
                cols.push((e.values[i], v));
            }
        }
        cols.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * n);
        for (w, v) in cols {
            values.push(w);
            vectors.extend(v);
        }
        Ok(Eigen { values, vectors })
    }
}
