use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::refine::{dedupe, refine_candidates};
use super::sectors::{exchange_sectors, project, Column};
use super::{
    cluster_lines, detect_events, group_lines, CrossingEvent, CrossingFeature, Executor, FieldRange,
    ProbeBasis, RetainedVectors, SpectralLine, SweepOptions, SweepResult, VectorRetention,
};
use crate::eigen::{BlockPlan, Eigen, EigenSolver};
use crate::linalg::{HermitianMatrix, Matrix, C64};
use crate::spin::{exchange_classes, spin_operators, strides, HamiltonianTerms, SpinSystemSpec};
use crate::thermal::ThermalZfsModel;
use crate::{Error, Result};

/// Vectors are kept at every point below this dimension.
const FULL_RETENTION_DIM: usize = 128;

/// One diagonal block in its own orthonormal basis.
#[derive(Debug, Clone)]
struct Piece {
    columns: Vec<Column>,
    parts: [Matrix; 3],
    /// Non-zero elements of the probe projector.
    probe: Vec<(usize, usize, C64)>,
}

impl Piece {
    fn at(&self, b: f64, d: f64) -> HermitianMatrix {
        let mut h = self.parts[0].clone();
        let (z, f) = (self.parts[1].as_slice(), self.parts[2].as_slice());
        for (i, v) in h.as_mut_slice().iter_mut().enumerate() {
            *v += z[i] * d + f[i] * b;
        }
        HermitianMatrix::from_matrix_unchecked(h)
    }

    fn projection(&self, v: &[C64]) -> f64 {
        self.probe.iter().map(|&(a, b, p)| (v[a].conj() * p * v[b]).re).sum()
    }

    fn eigh<S: EigenSolver + ?Sized>(&self, solver: &S, b: f64, d: f64) -> Result<Eigen> {
        let h = self.at(b, d);
        if h.dim() == 1 {
            return Ok(Eigen { values: alloc::vec![h[(0, 0)].re], vectors: alloc::vec![C64::new(1.0, 0.0)] });
        }
        solver.eigh(&h)
    }

    fn eigenvalues<S: EigenSolver + ?Sized>(&self, solver: &S, b: f64, d: f64) -> Result<Vec<f64>> {
        let h = self.at(b, d);
        if h.dim() == 1 {
            return Ok(alloc::vec![h[(0, 0)].re]);
        }
        solver.eigvalsh(&h)
    }
}

/// m_S = 0 projector of the probe as a function of two basis indices.
struct Probe {
    stride: usize,
    local: [[C64; 3]; 3],
}

impl Probe {
    fn new(spec: &SpinSystemSpec, basis: ProbeBasis) -> Result<Self> {
        let slot = spec.probe_site();
        let stride = strides(&spec.dims())[slot];
        let zero = C64::new(0.0, 0.0);
        let mut local = [[zero; 3]; 3];
        match basis {
            ProbeBasis::Field => local[1][1] = C64::new(1.0, 0.0),
            ProbeBasis::NvAxis => {
                let s = spin_operators(3)?;
                let axis = spec.sites()[slot].axis.vector();
                let mut sn = Matrix::zeros(3);
                for (op, w) in s.components().into_iter().zip(axis.0) {
                    sn.add_scaled(op.as_matrix(), C64::new(w, 0.0));
                }
                let sn2 = sn.matmul(&sn);
                for (i, row) in local.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = if i == j { C64::new(1.0, 0.0) } else { zero } - sn2[(i, j)];
                    }
                }
            }
        }
        Ok(Probe { stride, local })
    }

    /// Projector elements within the span of `cols`.
    fn restrict(&self, cols: &[Column]) -> Vec<(usize, usize, C64)> {
        let st = self.stride;
        let mut owner: BTreeMap<usize, Vec<(usize, C64)>> = BTreeMap::new();
        for (b, col) in cols.iter().enumerate() {
            for &(j, y) in col {
                owner.entry(j).or_default().push((b, y));
            }
        }
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (a, col) in cols.iter().enumerate() {
            for &(i, x) in col {
                let di = (i / st) % 3;
                for (c, &p) in self.local[di].iter().enumerate() {
                    if p == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let Some(targets) = owner.get(&(i - di * st + c * st)) else { continue };
                    for &(b, y) in targets {
                        *acc.entry((a, b)).or_insert(C64::new(0.0, 0.0)) += x.conj() * p * y;
                    }
                }
            }
        }
        acc.into_iter().filter(|(_, v)| v.norm_sqr() > 1e-28).map(|((a, b), v)| (a, b, v)).collect()
    }
}

/// A spin system with its Hamiltonian pieces, block structure and probe
/// projector precomputed.
///
/// The basis is split first into exchange-symmetry sectors of identical,
/// identically coupled units, then into blocks that the Hamiltonian never
/// connects. Every block is diagonalised on its own.
#[derive(Debug, Clone)]
pub struct Prepared {
    terms: HamiltonianTerms,
    pieces: Vec<Piece>,
}

impl Prepared {
    /// Precompute everything that does not depend on B or D.
    pub fn new(spec: &SpinSystemSpec, basis: ProbeBasis) -> Result<Self> {
        let terms = HamiltonianTerms::new(spec)?;
        let n = terms.dimension();
        let probe = Probe::new(spec, basis)?;
        let classes = exchange_classes(spec, &terms);
        let sectors = exchange_sectors(terms.dims(), &classes)
            .unwrap_or_else(|| alloc::vec![(0..n).map(|i| alloc::vec![(i, C64::new(1.0, 0.0))]).collect()]);
        let mut pieces = Vec::new();
        for cols in sectors {
            let parts = terms.parts().map(|m| project(m, &cols));
            let tol = parts.iter().map(|m| 1e-12 * (1.0 + m.max_abs())).collect::<Vec<_>>();
            let nonzero = |i: usize, j: usize| parts.iter().zip(&tol).any(|(m, &t)| m[(i, j)].norm_sqr() > t * t);
            let plan = BlockPlan::detect(cols.len(), nonzero);
            for idx in plan.blocks() {
                let columns: Vec<Column> = idx.iter().map(|&k| cols[k].clone()).collect();
                let sub = |m: &Matrix| Matrix::from_fn(idx.len(), |a, b| m[(idx[a], idx[b])]);
                let probe = probe.restrict(&columns);
                pieces.push(Piece { columns, parts: [sub(&parts[0]), sub(&parts[1]), sub(&parts[2])], probe });
            }
        }
        Ok(Prepared { terms, pieces })
    }

    /// Composite dimension.
    pub fn dimension(&self) -> usize {
        self.terms.dimension()
    }

    /// Sizes of the blocks that are diagonalised separately.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.pieces.iter().map(|p| p.columns.len()).collect()
    }

    /// H(B, D).
    pub fn hamiltonian(&self, b: f64, d: f64) -> HermitianMatrix {
        self.terms.at(b, d)
    }

    /// Unshifted eigenvalues at (B, D), ascending.
    pub fn eigenvalues<S: EigenSolver + ?Sized>(&self, solver: &S, b: f64, d: f64) -> Result<Vec<f64>> {
        let mut all = Vec::with_capacity(self.dimension());
        for p in &self.pieces {
            all.extend(p.eigenvalues(solver, b, d)?);
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    /// Unshifted eigenvalues of block `blk` alone, ascending.
    pub fn block_eigenvalues<S: EigenSolver + ?Sized>(&self, solver: &S, blk: usize, b: f64, d: f64) -> Result<Vec<f64>> {
        self.pieces[blk].eigenvalues(solver, b, d)
    }

    /// Unshifted eigenvalues, ascending, each with its (block, index within
    /// block) label.
    pub fn labelled_eigenvalues<S: EigenSolver + ?Sized>(
        &self,
        solver: &S,
        b: f64,
        d: f64,
    ) -> Result<Vec<(f64, usize, usize)>> {
        let mut out = Vec::with_capacity(self.dimension());
        for (blk, p) in self.pieces.iter().enumerate() {
            for (k, w) in p.eigenvalues(solver, b, d)?.into_iter().enumerate() {
                out.push((w, blk, k));
            }
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        Ok(out)
    }

    /// Unshifted eigenvalues and probe projections at (B, D).
    pub fn spectrum<S: EigenSolver + ?Sized>(&self, solver: &S, b: f64, d: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(self.dimension());
        for p in &self.pieces {
            let e = p.eigh(solver, b, d)?;
            for i in 0..e.dim() {
                pairs.push((e.values[i], p.projection(e.vector(i))));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(pairs.into_iter().unzip())
    }

    /// Full eigendecomposition at (B, D) in the product basis.
    pub fn eigen<S: EigenSolver + ?Sized>(&self, solver: &S, b: f64, d: f64) -> Result<Eigen> {
        let n = self.dimension();
        let mut cols: Vec<(f64, Vec<C64>)> = Vec::with_capacity(n);
        for p in &self.pieces {
            let e = p.eigh(solver, b, d)?;
            for i in 0..e.dim() {
                let mut v = alloc::vec![C64::new(0.0, 0.0); n];
                for (&c, col) in e.vector(i).iter().zip(&p.columns) {
                    for &(g, x) in col {
                        v[g] += c * x;
                    }
                }
                cols.push((e.values[i], v));
            }
        }
        cols.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut values = Vec::with_capacity(n);
        let mut vectors = Vec::with_capacity(n * n);
        for (w, v) in cols {
            values.push(w);
            vectors.extend(v);
        }
        Ok(Eigen { values, vectors })
    }
}

/// Sweep, refined events, lines and features of one system.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    /// Raw sweep.
    pub sweep: SweepResult,
    /// Refined, de-duplicated events, ascending in field.
    pub events: Vec<CrossingEvent>,
    /// Events merged into lines.
    pub lines: Vec<SpectralLine>,
    /// Lines clustered into features.
    pub features: Vec<CrossingFeature>,
}

/// Solver, executor and thresholds bundled together.
#[derive(Debug, Clone, Default)]
pub struct Engine<S, X> {
    /// Eigensolver used at every point.
    pub solver: S,
    /// Executor for grid points and candidate refinement.
    pub executor: X,
    /// Detection thresholds.
    pub options: SweepOptions,
}

fn zfs(model: &ThermalZfsModel, t: f64) -> Result<f64> {
    let d = model.zfs_at(t)?;
    if !(d > 0.0) {
        return Err(Error::InvalidParameter("zero-field splitting must be positive".into()));
    }
    Ok(d)
}

impl<S: EigenSolver, X: Executor> Engine<S, X> {
    /// Bundle the parts.
    pub fn new(solver: S, executor: X, options: SweepOptions) -> Self {
        Engine { solver, executor, options }
    }

    /// Precompute a system for repeated use.
    pub fn prepare(&self, spec: &SpinSystemSpec) -> Result<Prepared> {
        Prepared::new(spec, self.options.probe_basis)
    }

    /// Sweep `range` at temperature `t`.
    pub fn sweep(&self, spec: &SpinSystemSpec, range: FieldRange, t: f64, model: &ThermalZfsModel) -> Result<SweepResult> {
        let d = zfs(model, t)?;
        self.sweep_prepared(&self.prepare(spec)?, range, t, d)
    }

    /// Sweep a prepared system at an explicit D.
    pub fn sweep_prepared(&self, p: &Prepared, range: FieldRange, t: f64, d: f64) -> Result<SweepResult> {
        let grid = range.grid();
        let points = self.executor.map_indexed(grid.len(), |i| p.spectrum(&self.solver, grid[i], d));
        let mut eigenvalues = Vec::with_capacity(grid.len());
        let mut projections = Vec::with_capacity(grid.len());
        for r in points {
            let (w, pr) = r?;
            eigenvalues.push(w);
            projections.push(pr);
        }
        let lowest = eigenvalues.iter().map(|w| w[0]).fold(f64::INFINITY, f64::min);
        let shift = lowest.abs() + self.options.positivity_margin;
        for w in eigenvalues.iter_mut() {
            for v in w.iter_mut() {
                *v += shift;
            }
        }
        let mut sr = SweepResult {
            field_grid: grid,
            eigenvalues,
            projections,
            shift_applied: shift,
            temperature: t,
            zfs: d,
            eigenvectors: Vec::new(),
        };
        if self.options.retain_vectors == VectorRetention::Auto {
            let mut keep: Vec<usize> = if p.dimension() < FULL_RETENTION_DIM {
                (0..sr.len()).collect()
            } else {
                let h = sr.step();
                detect_events(&sr, &self.options)
                    .iter()
                    .flat_map(|e| {
                        let k = crate::math::floor((e.field - sr.field_grid[0]) / h) as usize;
                        [k.min(sr.len() - 1), (k + 1).min(sr.len() - 1)]
                    })
                    .collect()
            };
            keep.sort_unstable();
            keep.dedup();
            let kept = self.executor.map_indexed(keep.len(), |j| p.eigen(&self.solver, sr.field_grid[keep[j]], d));
            for (j, e) in kept.into_iter().enumerate() {
                sr.eigenvectors.push(RetainedVectors { index: keep[j], eigen: e? });
            }
        }
        Ok(sr)
    }

    /// Candidate events of a sweep (unrefined).
    pub fn detect_events(&self, sr: &SweepResult) -> Vec<CrossingEvent> {
        detect_events(sr, &self.options)
    }

    /// Refine a candidate at temperature `t`; a bracket holding several gap
    /// minima yields several events.
    pub fn refine_and_classify(
        &self,
        spec: &SpinSystemSpec,
        event: &CrossingEvent,
        t: f64,
        model: &ThermalZfsModel,
    ) -> Result<Vec<CrossingEvent>> {
        let d = zfs(model, t)?;
        refine_candidates(&self.prepare(spec)?, &self.solver, &self.options, core::slice::from_ref(event), d, None)
    }

    /// Sweep, detect, refine, merge into lines and cluster into features.
    pub fn analyze(&self, spec: &SpinSystemSpec, range: FieldRange, t: f64, model: &ThermalZfsModel) -> Result<Analysis> {
        let d = zfs(model, t)?;
        let p = self.prepare(spec)?;
        self.analyze_prepared(&p, range, t, d)
    }

    /// [`Engine::analyze`] on a prepared system at an explicit D.
    pub fn analyze_prepared(&self, p: &Prepared, range: FieldRange, t: f64, d: f64) -> Result<Analysis> {
        let sweep = self.sweep_prepared(p, range, t, d)?;
        let candidates = self.detect_events(&sweep);
        let domain = (range.b_min, range.b_max);
        // candidates sharing a bracket share diagonalisations
        let mut groups: BTreeMap<(u64, u64), Vec<CrossingEvent>> = BTreeMap::new();
        for c in candidates {
            groups.entry((c.bracket.0.to_bits(), c.bracket.1.to_bits())).or_default().push(c);
        }
        let groups: Vec<Vec<CrossingEvent>> = groups.into_values().collect();
        let refined = self.executor.map_indexed(groups.len(), |i| {
            refine_candidates(p, &self.solver, &self.options, &groups[i], d, Some(domain))
        });
        let mut events = Vec::new();
        for r in refined {
            events.extend(r?);
        }
        let events = dedupe(events);
        let lines = group_lines(&events, self.options.line_merge);
        let features = cluster_lines(&lines, self.options.cluster_radius);
        Ok(Analysis { sweep, events, lines, features })
    }
}
