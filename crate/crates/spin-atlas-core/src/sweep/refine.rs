use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::detect::DEGENERATE;
use super::{CrossingEvent, CrossingKind, Prepared, Signature, SweepOptions};
use crate::eigen::EigenSolver;
use crate::Result;

const PROBE_SAMPLES: usize = 9;

/// Events closer than this (G) on the same level pair are duplicates.
pub(crate) const DEDUPE_FIELD: f64 = 0.05;

pub(crate) fn gap_at<S: EigenSolver + ?Sized>(p: &Prepared, solver: &S, b: f64, d: f64, lo: usize) -> Result<f64> {
    let w = p.eigenvalues(solver, b, d)?;
    Ok(w[lo + 1] - w[lo])
}

/// Minimum of `f` on [a, b] by Brent's method (parabolic steps with a
/// golden-section fallback), starting from the interior point `x0` with
/// value `f0`. Stops once the minimum is pinned to within `tol`.
pub(crate) fn brent_min(
    mut f: impl FnMut(f64) -> Result<f64>,
    (mut a, mut b): (f64, f64),
    (x0, f0): (f64, f64),
    tol: f64,
) -> Result<(f64, f64)> {
    const C: f64 = 0.381_966_011_250_105_1;
    let (mut x, mut w, mut v) = (x0, x0, x0);
    let (mut fx, mut fw, mut fv) = (f0, f0, f0);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    let tol1 = 0.25 * tol;
    let tol2 = 2.0 * tol1;
    for _ in 0..100 {
        let xm = 0.5 * (a + b);
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let golden = |x: f64| if x >= xm { a - x } else { b - x };
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let prev = e;
            e = d;
            if p.abs() >= (0.5 * q * prev).abs() || p <= q * (a - x) || p >= q * (b - x) {
                e = golden(x);
                d = C * e;
            } else {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
            }
        } else {
            e = golden(x);
            d = C * e;
        }
        let u = if d.abs() >= tol1 { x + d } else if d >= 0.0 { x + tol1 } else { x - tol1 };
        let fu = f(u)?;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            (v, fv, w, fw, x, fx) = (w, fw, x, fx, u, fu);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                (v, fv, w, fw) = (w, fw, u, fu);
            } else if fu <= fv || v == x || v == w {
                (v, fv) = (u, fu);
            }
        }
    }
    Ok((x, fx))
}

/// Root of `f` on [a, b] by bisection, assuming a sign change.
pub(crate) fn bisect(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a)?;
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Block spectra of one bracket, kept so candidates sharing the bracket
/// reuse the same diagonalisations.
struct Spectra<'a, S: ?Sized> {
    p: &'a Prepared,
    solver: &'a S,
    d: f64,
    seen: BTreeMap<(u64, usize), Vec<f64>>,
}

impl<'a, S: EigenSolver + ?Sized> Spectra<'a, S> {
    fn new(p: &'a Prepared, solver: &'a S, d: f64) -> Self {
        Spectra { p, solver, d, seen: BTreeMap::new() }
    }

    fn block(&mut self, blk: usize, x: f64) -> Result<&[f64]> {
        let key = (x.to_bits(), blk);
        if !self.seen.contains_key(&key) {
            let w = self.p.block_eigenvalues(self.solver, blk, x, self.d)?;
            self.seen.insert(key, w);
        }
        Ok(&self.seen[&key])
    }

    fn labelled(&mut self, x: f64) -> Result<Vec<(f64, usize, usize)>> {
        let mut out = Vec::with_capacity(self.p.dimension());
        for blk in 0..self.p.block_sizes().len() {
            out.extend(self.block(blk, x)?.iter().enumerate().map(|(k, &w)| (w, blk, k)));
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
        Ok(out)
    }
}

/// Which labelled levels form pair (`lo`, `lo` + 1) at field `at`.
#[derive(Debug, Clone, Copy)]
enum Pair {
    /// One block; use the global ordering.
    Dense,
    /// Both levels in one block, by index within it.
    Within(usize, usize, usize),
    /// Levels in two different blocks as (block, index) each.
    Across((usize, usize), (usize, usize)),
}

fn label_pair<S: EigenSolver + ?Sized>(sp: &mut Spectra<S>, lo: usize, at: f64) -> Result<Pair> {
    if sp.p.block_sizes().len() == 1 {
        return Ok(Pair::Dense);
    }
    let l = sp.labelled(at)?;
    let ((_, bx, ix), (_, by, iy)) = (l[lo], l[lo + 1]);
    Ok(if bx == by { Pair::Within(bx, ix.min(iy), ix.max(iy)) } else { Pair::Across((bx, ix), (by, iy)) })
}

/// Signed difference e_y - e_x of a labelled pair; for [`Pair::Dense`] the
/// global gap.
fn pair_gap<S: EigenSolver + ?Sized>(sp: &mut Spectra<S>, lo: usize, pair: Pair, f: f64) -> Result<f64> {
    match pair {
        Pair::Dense => {
            let w = sp.block(0, f)?;
            Ok(w[lo + 1] - w[lo])
        }
        Pair::Within(b, i, j) => {
            let w = sp.block(b, f)?;
            Ok(w[j] - w[i])
        }
        Pair::Across((bx, ix), (by, iy)) => Ok(sp.block(by, f)?[iy] - sp.block(bx, f)?[ix]),
    }
}

/// Root of `f` on [a, b] by the Illinois variant of regula falsi, given
/// f(a) and f(b) of opposite sign. A step that fails to halve the bracket is
/// followed by a bisection step, so steep or kinked functions still converge.
fn illinois(
    mut f: impl FnMut(f64) -> Result<f64>,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
    tol: f64,
) -> Result<f64> {
    let mut side = 0;
    let mut bisect_next = false;
    for _ in 0..200 {
        if (b - a).abs() < tol {
            break;
        }
        let width = (b - a).abs();
        let x = if bisect_next || fb == fa { 0.5 * (a + b) } else { (a * fb - b * fa) / (fb - fa) };
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == (fb < 0.0) {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        bisect_next = !bisect_next && (b - a).abs() > 0.5 * width;
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Minimum of a gap by repeated vertices of the parabola through three
/// (x, gap²) points; exact for a two-level avoided crossing. `None` when the
/// steps leave [l, r] or stop shrinking.
fn hyperbolic_min(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut pts: Vec<(f64, f64)>,
    (l, r): (f64, f64),
    tol: f64,
) -> Result<Option<(f64, f64)>> {
    let mut last: Option<f64> = None;
    for _ in 0..8 {
        let j = (1..pts.len() - 1).min_by(|&x, &y| pts[x].1.total_cmp(&pts[y].1)).unwrap_or(1);
        let [(x0, g0), (x1, g1), (x2, g2)] = [pts[j - 1], pts[j], pts[j + 1]];
        let (y0, y1, y2) = (g0 * g0, g1 * g1, g2 * g2);
        let s01 = (y1 - y0) / (x1 - x0);
        let s12 = (y2 - y1) / (x2 - x1);
        let curv = (s12 - s01) / (x2 - x0);
        if !(curv > 0.0) {
            return Ok(None);
        }
        let xv = 0.5 * (x0 + x1) - 0.5 * s01 / curv;
        if !(l..=r).contains(&xv) {
            return Ok(None);
        }
        if let Some(&(x, g)) = pts.iter().find(|q| (q.0 - xv).abs() < 0.5 * tol) {
            return Ok(Some((x, g)));
        }
        let gv = f(xv)?;
        if last.is_some_and(|x| (x - xv).abs() < 0.5 * tol) {
            return Ok(Some((xv, gv)));
        }
        last = Some(xv);
        let at = pts.partition_point(|q| q.0 < xv);
        pts.insert(at, (xv, gv));
    }
    Ok(None)
}

fn gap_minima<S: EigenSolver + ?Sized>(
    sp: &mut Spectra<S>,
    lo: usize,
    pair: Pair,
    (a, b): (f64, f64),
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut g = |f: f64| pair_gap(sp, lo, pair, f).map(f64::abs);
    let xs: Vec<f64> = (0..PROBE_SAMPLES).map(|j| a + (b - a) * j as f64 / (PROBE_SAMPLES - 1) as f64).collect();
    let mut fs = Vec::with_capacity(PROBE_SAMPLES);
    for &x in &xs {
        fs.push(g(x)?);
    }
    let last = PROBE_SAMPLES - 1;
    let mut out = Vec::new();
    for j in 0..PROBE_SAMPLES {
        let left_ok = j == 0 || fs[j] <= fs[j - 1];
        let right_ok = j == last || fs[j] < fs[j + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        let (jl, jr) = (j.saturating_sub(1), (j + 1).min(last));
        if fs[jl].max(fs[jr]) < DEGENERATE {
            // levels that stay degenerate are not a crossing
            continue;
        }
        let (l, r) = (xs[jl], xs[jr]);
        if j > 0 && j < last {
            let pts = alloc::vec![(l, fs[j - 1]), (xs[j], fs[j]), (r, fs[j + 1])];
            if let Some(m) = hyperbolic_min(&mut g, pts, (l, r), tol)? {
                out.push(m);
                continue;
            }
        } else if !(j == 0 && a == 0.0) {
            // still falling at the bracket end: the minimum lies outside
            continue;
        }
        out.push(brent_min(&mut g, (l, r), (xs[j], fs[j]), tol)?);
    }
    Ok(out)
}

fn classify(min_gap: f64, opts: &SweepOptions) -> CrossingKind {
    if min_gap < opts.gap_true {
        CrossingKind::True
    } else {
        CrossingKind::Avoided
    }
}

/// Locate a candidate precisely at zero-field splitting `d`.
///
/// `domain` clips the bracket to the swept range. A gap bracket that holds
/// several minima yields one event per minimum.
/// Refine candidates that share a bracket, reusing spectra between them.
pub(crate) fn refine_candidates<S: EigenSolver + ?Sized>(
    p: &Prepared,
    solver: &S,
    opts: &SweepOptions,
    evs: &[CrossingEvent],
    d: f64,
    domain: Option<(f64, f64)>,
) -> Result<Vec<CrossingEvent>> {
    let mut sp = Spectra::new(p, solver, d);
    let mut out = Vec::new();
    for ev in evs {
        out.extend(refine_one(&mut sp, opts, ev, domain)?);
    }
    Ok(out)
}

fn refine_one<S: EigenSolver + ?Sized>(
    sp: &mut Spectra<S>,
    opts: &SweepOptions,
    ev: &CrossingEvent,
    domain: Option<(f64, f64)>,
) -> Result<Vec<CrossingEvent>> {
    let (p, solver, d) = (sp.p, sp.solver, sp.d);
    let (mut a, mut b) = ev.bracket;
    if let Some((lo, hi)) = domain {
        a = a.max(lo);
        b = b.min(hi);
    }
    let n = p.dimension();
    match ev.signature {
        Signature::ProjectionMidpoint => {
            let i = ev.tracked_level;
            let pf = |x: f64| -> Result<f64> { Ok(p.spectrum(solver, x, d)?.1[i] - 0.5) };
            let x = bisect(pf, a, b, opts.resolution)?;
            let w = p.eigenvalues(solver, x, d)?;
            let below = if i > 0 { w[i] - w[i - 1] } else { f64::INFINITY };
            let above = if i + 1 < n { w[i + 1] - w[i] } else { f64::INFINITY };
            let (levels, min_gap) = if below < above { ((i - 1, i), below) } else { ((i, i + 1), above) };
            Ok(alloc::vec![CrossingEvent {
                field: x,
                levels,
                min_gap,
                kind: classify(min_gap, opts),
                bracket: (a, b),
                ..*ev
            }])
        }
        _ => {
            let lo = ev.levels.0;
            let pair = label_pair(sp, lo, ev.field.clamp(a, b))?;
            if let Pair::Across(..) = pair {
                // disjoint blocks never mix, so a sign change is an exact crossing
                let mut s = |f: f64| pair_gap(sp, lo, pair, f);
                let (sa, sb) = (s(a)?, s(b)?);
                if (sa < 0.0) != (sb < 0.0) && sa.abs().min(sb.abs()) >= DEGENERATE {
                    let x = illinois(s, (a, sa), (b, sb), 0.1 * opts.resolution)?;
                    return Ok(alloc::vec![CrossingEvent {
                        field: x,
                        min_gap: 0.0,
                        kind: classify(0.0, opts),
                        bracket: (a, b),
                        ..*ev
                    }]);
                }
            }
            let mut minima = gap_minima(sp, lo, pair, (a, b), opts.resolution)?;
            if a == 0.0 {
                let g0 = gap_at(p, solver, 0.0, d, lo)?;
                for m in minima.iter_mut() {
                    if m.0 - a <= (b - a) / (PROBE_SAMPLES - 1) as f64 && g0 <= m.1 {
                        *m = (0.0, g0);
                    }
                }
            }
            Ok(minima
                .into_iter()
                .map(|(x, g)| CrossingEvent { field: x, min_gap: g, kind: classify(g, opts), bracket: (a, b), ..*ev })
                .collect())
        }
    }
}

/// Sort by field and drop repeats of the same pair within [`DEDUPE_FIELD`].
pub(crate) fn dedupe(mut events: Vec<CrossingEvent>) -> Vec<CrossingEvent> {
    events.sort_by(|x, y| x.field.total_cmp(&y.field).then(x.levels.cmp(&y.levels)));
    let mut out: Vec<CrossingEvent> = Vec::with_capacity(events.len());
    for e in events {
        let dup = out
            .iter()
            .rev()
            .take_while(|o| e.field - o.field < DEDUPE_FIELD)
            .any(|o| o.levels == e.levels);
        if !dup {
            out.push(e);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimisers_and_roots_on_known_functions() {
        let (x, fx) = brent_min(|x| Ok((x - 1.3) * (x - 1.3) + 0.2), (0.0, 4.0), (2.0, 1.09), 1e-6).unwrap();
        assert!((x - 1.3).abs() < 1e-5);
        assert!((fx - 0.2).abs() < 1e-9);
        let (x, _) = brent_min(|x| Ok((x - 0.7).abs()), (0.0, 1.0), (0.5, 0.2), 1e-6).unwrap();
        assert!((x - 0.7).abs() < 1e-6);
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-9).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-8);
        let f = |x: f64| Ok(x * x * x - 2.0 * x - 5.0);
        let r = illinois(f, (2.0, -1.0), (3.0, 16.0), 1e-12).unwrap();
        assert!((r - 2.094_551_481_542_327).abs() < 1e-9);
    }

    fn ev(field: f64, levels: (usize, usize)) -> CrossingEvent {
        CrossingEvent {
            field,
            levels,
            min_gap: 1.0,
            kind: CrossingKind::Avoided,
            projection_jump: 0.0,
            bracket: (field, field),
            signature: Signature::GapMinimum,
            tracked_level: levels.0,
        }
    }

    #[test]
    fn dedupe_keeps_distinct_pairs() {
        let out = dedupe(alloc::vec![ev(10.0, (1, 2)), ev(10.02, (1, 2)), ev(10.01, (2, 3)), ev(10.2, (1, 2))]);
        let fields: Vec<_> = out.iter().map(|e| (e.field, e.levels)).collect();
        assert_eq!(fields, alloc::vec![(10.0, (1, 2)), (10.01, (2, 3)), (10.2, (1, 2))]);
    }
}

