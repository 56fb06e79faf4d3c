use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Trace;
use crate::{math, Error, Result};

/// Stopping rules of the least-squares iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    /// Converged when every parameter changes by less than this, relative.
    pub tolerance: f64,
    /// Iteration cap.
    pub max_iterations: usize,
    /// Seeds closer than this many sample spacings are duplicates.
    pub min_seed_separation: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { tolerance: 1e-8, max_iterations: 200, min_seed_separation: 2.0 }
    }
}

/// One fitted Lorentzian dip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dip {
    /// Center, G.
    pub center: f64,
    /// Half width at half minimum, G.
    pub hwhm: f64,
    /// Depth as a fraction of the baseline at the center.
    pub depth: f64,
    /// One-sigma uncertainty of the center, G.
    pub center_err: f64,
    /// One-sigma uncertainty of the width, G.
    pub hwhm_err: f64,
    /// One-sigma uncertainty of the depth.
    pub depth_err: f64,
    /// Depth is not distinguishable from zero; the dip can be dropped.
    pub removable: bool,
}

impl Dip {
    /// Contrast in percent (100 × depth).
    pub fn contrast_percent(&self) -> f64 {
        100.0 * self.depth
    }
}

/// Result of [`fit_dips`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipFit {
    /// Dips in seed order.
    pub dips: Vec<Dip>,
    /// Baseline (a, b): pl = a + b·B.
    pub baseline: (f64, f64),
    /// Root-mean-square residual, PL units.
    pub residual_rms: f64,
    /// Iterations used.
    pub iterations: usize,
    /// False when the iteration cap was reached; the last iterate is reported.
    pub converged: bool,
}

impl DipFit {
    /// Model PL at field `b`.
    pub fn model(&self, b: f64) -> f64 {
        let s: f64 = self.dips.iter().map(|d| lorentz(b - d.center, d.hwhm, d.depth)).sum();
        (self.baseline.0 + self.baseline.1 * b) * (1.0 - s)
    }

    /// Fitted centers in dip order.
    pub fn centers(&self) -> Vec<f64> {
        self.dips.iter().map(|d| d.center).collect()
    }
}

fn lorentz(x: f64, w: f64, d: f64) -> f64 {
    d * w * w / (x * x + w * w)
}

/// Fields are measured from the trace midpoint inside the solver so that the
/// baseline parameters stay well conditioned.
struct Problem<'a> {
    x: Vec<f64>,
    y: &'a [f64],
    origin: f64,
}

impl Problem<'_> {
    fn model(&self, p: &[f64], x: f64) -> f64 {
        let s: f64 = p[2..].chunks_exact(3).map(|q| lorentz(x - q[0], q[1], q[2])).sum();
        (p[0] + p[1] * x) * (1.0 - s)
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for ((r, &x), &y) in out.iter_mut().zip(&self.x).zip(self.y) {
            *r = y - self.model(p, x);
        }
    }

    fn cost(&self, p: &[f64]) -> f64 {
        self.x.iter().zip(self.y).map(|(&x, &y)| {
            let r = y - self.model(p, x);
            r * r
        })
        .sum()
    }

    /// Central-difference Jacobian of the model, row-major n × m.
    fn jacobian(&self, p: &[f64], scale: &[f64], jac: &mut [f64]) {
        let m = p.len();
        let mut q = p.to_vec();
        for j in 0..m {
            let h = 1e-6 * p[j].abs().max(scale[j]);
            q[j] = p[j] + h;
            let up: Vec<f64> = self.x.iter().map(|&x| self.model(&q, x)).collect();
            q[j] = p[j] - h;
            for (i, &x) in self.x.iter().enumerate() {
                jac[i * m + j] = (up[i] - self.model(&q, x)) / (2.0 * h);
            }
            q[j] = p[j];
        }
    }
}

/// Solve the symmetric positive definite system `a·x = b` (m × m, row-major)
/// by Cholesky. None if not positive definite.
fn cholesky_solve(a: &[f64], b: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let s: f64 = a[i * m + j] - (0..j).map(|k| l[i * m + k] * l[j * m + k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * m + i] = math::sqrt(s);
            } else {
                l[i * m + j] = s / l[j * m + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..m {
        y[i] = (y[i] - (0..i).map(|k| l[i * m + k] * y[k]).sum::<f64>()) / l[i * m + i];
    }
    for i in (0..m).rev() {
        y[i] = (y[i] - (i + 1..m).map(|k| l[k * m + i] * y[k]).sum::<f64>()) / l[i * m + i];
    }
    Some(y)
}

/// Inverse of an SPD matrix through its Cholesky factor, or None.
fn spd_inverse(a: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        let col = cholesky_solve(a, &e, m)?;
        for i in 0..m {
            inv[i * m + j] = col[i];
        }
    }
    Some(inv)
}

fn normal_equations(jac: &[f64], r: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jtj = vec![0.0; m * m];
    let mut jtr = vec![0.0; m];
    for (row, &ri) in jac.chunks_exact(m).zip(r) {
        for a in 0..m {
            jtr[a] += row[a] * ri;
            for b in 0..=a {
                jtj[a * m + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            jtj[b * m + a] = jtj[a * m + b];
        }
    }
    (jtj, jtr)
}

/// Initial width: distance from the seed to where the dip has recovered half
/// way to the baseline, capped by the distance to neighbouring seeds.
fn width_guess(t: &Trace, base: (f64, f64), seed: f64, others: &[f64]) -> f64 {
    let f = t.field();
    let k = f.partition_point(|&x| x < seed).min(f.len() - 1);
    let rel = |i: usize| 1.0 - t.pl()[i] / (base.0 + base.1 * f[i]);
    let depth = rel(k);
    let h = t.spacing();
    let mut w = 2.0 * h;
    if depth > 0.0 {
        let half = |range: &mut dyn Iterator<Item = usize>| {
            for i in range {
                if rel(i) < 0.5 * depth {
                    return Some((f[i] - seed).abs());
                }
            }
            None
        };
        let l = half(&mut (0..k).rev());
        let r = half(&mut (k..f.len()));
        if let Some(v) = match (l, r) {
            (Some(a), Some(b)) => Some(0.5 * (a + b)),
            (a, b) => a.or(b),
        } {
            w = v.max(h);
        }
    }
    let gap = others.iter().filter(|&&o| o != seed).map(|o| (o - seed).abs()).fold(f64::INFINITY, f64::min);
    w.min(0.5 * gap).max(0.5 * h)
}

/// Fit Lorentzian dips seeded at `seeds` (fields, G).
///
/// Errors if a seed lies outside the trace, two seeds are closer than
/// `min_seed_separation` sample spacings, or the converged problem is
/// singular for reasons other than a vanishing dip.
pub fn fit_dips(trace: &Trace, seeds: &[f64], opts: &FitOptions) -> Result<DipFit> {
    if seeds.is_empty() {
        return Err(Error::InvalidSeeds("no seeds".into()));
    }
    let (lo, hi) = trace.range();
    if let Some(s) = seeds.iter().find(|s| !(lo..=hi).contains(*s)) {
        return Err(Error::InvalidSeeds(alloc::format!("seed {s} G outside {lo}..{hi} G")));
    }
    let sep = opts.min_seed_separation * trace.spacing();
    for (i, a) in seeds.iter().enumerate() {
        if let Some(b) = seeds[..i].iter().find(|b| (*b - a).abs() < sep) {
            return Err(Error::InvalidSeeds(alloc::format!("seeds {b} G and {a} G closer than {sep} G")));
        }
    }
    let base = trace.edge_baseline();
    let mut p0 = vec![base.0, base.1];
    for &s in seeds {
        let k = trace.field().partition_point(|&x| x < s).min(trace.len() - 1);
        let d = 1.0 - trace.pl()[k] / (base.0 + base.1 * trace.field()[k]);
        p0.extend([s, width_guess(trace, base, s, seeds), d.clamp(1e-4, 0.9)]);
    }
    solve(trace, p0, opts)
}

/// Fit again starting from every parameter of `fit`.
pub fn refit(trace: &Trace, fit: &DipFit, opts: &FitOptions) -> Result<DipFit> {
    let mut p0 = vec![fit.baseline.0, fit.baseline.1];
    for d in &fit.dips {
        p0.extend([d.center, d.hwhm, d.depth]);
    }
    solve(trace, p0, opts)
}

/// Levenberg–Marquardt on parameters [a, b, (c, w, d)…] given in absolute
/// fields.
fn solve(trace: &Trace, mut p: Vec<f64>, opts: &FitOptions) -> Result<DipFit> {
    let (lo, hi) = trace.range();
    let origin = 0.5 * (lo + hi);
    // move to centered coordinates
    p[0] += p[1] * origin;
    for q in p[2..].chunks_exact_mut(3) {
        q[0] -= origin;
    }
    let prob = Problem { x: trace.field().iter().map(|b| b - origin).collect(), y: trace.pl(), origin };
    let n = trace.len();
    let m = p.len();
    let h = trace.spacing();
    let amp = p[0].abs().max(f64::MIN_POSITIVE);
    let mut scale = vec![amp, amp / (hi - lo)];
    for _ in 0..(m - 2) / 3 {
        scale.extend([h, h, 1e-3]);
    }

    let mut jac = vec![0.0; n * m];
    let mut r = vec![0.0; n];
    let mut cost = prob.cost(&p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        prob.jacobian(&p, &scale, &mut jac);
        prob.residuals(&p, &mut r);
        let (jtj, jtr) = normal_equations(&jac, &r, m);
        let dmax = (0..m).map(|i| jtj[i * m + i]).fold(0.0, f64::max);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..m {
                a[i * m + i] += lambda * jtj[i * m + i].max(1e-12 * dmax);
            }
            if let Some(step) = cholesky_solve(&a, &jtr, m) {
                let trial: Vec<f64> = p.iter().zip(&step).map(|(x, s)| x + s).collect();
                let c = prob.cost(&trial);
                if c <= cost {
                    let small = step.iter().zip(&p).zip(&scale).all(|((s, x), sc)| s.abs() <= opts.tolerance * x.abs().max(*sc));
                    p = trial;
                    cost = c;
                    lambda = (lambda * 0.1).max(1e-12);
                    accepted = true;
                    converged = small;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step left at any damping: a minimum within rounding
            converged = true;
        }
        if converged {
            break;
        }
    }

    // widths enter squared; report them positive
    for q in p[2..].chunks_exact_mut(3) {
        q[1] = q[1].abs();
    }
    prob.jacobian(&p, &scale, &mut jac);
    prob.residuals(&p, &mut r);
    let dof = n.saturating_sub(m).max(1) as f64;
    let s2 = cost / dof;
    let errs = uncertainties(&jac, &r, &p, m, s2)?;
    let dips = p[2..]
        .chunks_exact(3)
        .zip(errs[2..].chunks_exact(3))
        .map(|(q, e)| Dip {
            center: q[0] + prob.origin,
            hwhm: q[1],
            depth: q[2],
            center_err: e[0],
            hwhm_err: e[1],
            depth_err: e[2],
            removable: vanishing(q[2], e[2]),
        })
        .collect();
    Ok(DipFit {
        dips,
        baseline: (p[0] - p[1] * prob.origin, p[1]),
        residual_rms: math::sqrt(cost / n as f64),
        iterations,
        converged,
    })
}

fn vanishing(depth: f64, err: f64) -> bool {
    depth.abs() < 1e-6 || depth.abs() < 2.0 * err
}

/// One-sigma errors from s²·(JᵀJ)⁻¹. Parameters of dips whose depth is
/// vanishing are left out of the inversion (their center and width are
/// undetermined) and get infinite errors.
fn uncertainties(jac: &[f64], r: &[f64], p: &[f64], m: usize, s2: f64) -> Result<Vec<f64>> {
    let (jtj, _) = normal_equations(jac, r, m);
    let dmax = (0..m).map(|i| jtj[i * m + i]).fold(0.0, f64::max);
    let mut keep: Vec<usize> = (0..m).collect();
    for (k, q) in p[2..].chunks_exact(3).enumerate() {
        let j = 2 + 3 * k;
        if q[2].abs() < 1e-6 || jtj[j * m + j] <= 1e-14 * dmax {
            keep.retain(|&i| i != j && i != j + 1);
        }
    }
    let mk = keep.len();
    let sub: Vec<f64> = keep.iter().flat_map(|&i| keep.iter().map(move |&j| (i, j))).map(|(i, j)| jtj[i * m + j]).collect();
    // equilibrate before inverting so that the check is scale free
    let d: Vec<f64> = (0..mk).map(|i| math::sqrt(sub[i * mk + i])).collect();
    if d.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::SingularJacobian);
    }
    let eq: Vec<f64> = (0..mk * mk).map(|k| sub[k] / (d[k / mk] * d[k % mk])).collect();
    let inv = spd_inverse(&eq, mk).ok_or(Error::SingularJacobian)?;
    if (0..mk).any(|i| !(inv[i * mk + i] < 1e14)) {
        return Err(Error::SingularJacobian);
    }
    let mut out = vec![f64::INFINITY; m];
    for (a, &i) in keep.iter().enumerate() {
        out[i] = math::sqrt(s2 * inv[a * mk + a]) / d[a];
    }
    Ok(out)
}

/// Sorted |c_j − c_k| where dip k is the one nearest `central`, over all
/// other dips j.
pub fn side_peak_separations(fit: &DipFit, central: f64) -> Vec<f64> {
    let Some(k) = fit
        .dips
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.center - central).abs().total_cmp(&(b.1.center - central).abs()))
        .map(|(k, _)| k)
    else {
        return Vec::new();
    };
    let c = fit.dips[k].center;
    let mut s: Vec<f64> =
        fit.dips.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, d)| (d.center - c).abs()).collect();
    s.sort_by(f64::total_cmp);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(dips: &[(f64, f64, f64)], base: (f64, f64)) -> Trace {
        let f: Vec<f64> = (0..401).map(|i| 480.0 + i as f64 * 0.15).collect();
        let pl = f
            .iter()
            .map(|&x| (base.0 + base.1 * x) * (1.0 - dips.iter().map(|&(c, w, d)| lorentz(x - c, w, d)).sum::<f64>()))
            .collect();
        Trace::new(f, pl, None).unwrap()
    }

    #[test]
    fn recovers_single_noise_free_dip() {
        let t = synth(&[(512.0, 3.0, 0.02)], (1.0, 0.0));
        let fit = fit_dips(&t, &[511.0], &FitOptions::default()).unwrap();
        assert!(fit.converged);
        let d = fit.dips[0];
        assert!((d.center - 512.0).abs() < 512.0 * 1e-4);
        assert!((d.hwhm - 3.0).abs() < 3.0 * 1e-4);
        assert!((d.depth - 0.02).abs() < 0.02 * 1e-4);
        assert!((d.contrast_percent() - 2.0).abs() < 1e-3);
        assert!(fit.residual_rms < 1e-9);
    }

    #[test]
    fn seed_checks() {
        let t = synth(&[(512.0, 3.0, 0.02)], (1.0, 0.0));
        let o = FitOptions::default();
        assert!(matches!(fit_dips(&t, &[], &o), Err(Error::InvalidSeeds(_))));
        assert!(matches!(fit_dips(&t, &[700.0], &o), Err(Error::InvalidSeeds(_))));
        assert!(matches!(fit_dips(&t, &[512.0, 512.1], &o), Err(Error::InvalidSeeds(_))));
    }

    #[test]
    fn zero_depth_component_is_flagged() {
        let t = synth(&[(512.0, 3.0, 0.02)], (1.0, 0.0));
        let fit = fit_dips(&t, &[512.0, 525.0], &FitOptions::default()).unwrap();
        assert!(!fit.dips[0].removable);
        assert!(fit.dips[1].depth.abs() < 1e-4);
        assert!(fit.dips[1].removable);
    }

    #[test]
    fn separations() {
        let mk = |c: f64| Dip {
            center: c,
            hwhm: 1.0,
            depth: 0.01,
            center_err: 0.0,
            hwhm_err: 0.0,
            depth_err: 0.0,
            removable: false,
        };
        let fit = DipFit {
            dips: vec![mk(500.0), mk(512.0), mk(524.0)],
            baseline: (1.0, 0.0),
            residual_rms: 0.0,
            iterations: 0,
            converged: true,
        };
        assert_eq!(side_peak_separations(&fit, 512.0), vec![12.0, 12.0]);
        let single = DipFit { dips: vec![mk(512.0)], ..fit };
        assert!(side_peak_separations(&single, 512.0).is_empty());
    }
}
