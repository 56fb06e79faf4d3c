use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{CrossingEvent, CrossingKind, Signature, SweepOptions, SweepResult};
use crate::math;

/// Candidate crossings of a sweep, ascending in (grid index, level).
///
/// Three signatures are used:
/// * p_i changes by more than the jump threshold between adjacent points;
///   the partner is the neighbouring level with the opposite jump;
/// * the gap of a level pair has an interior local minimum below the gap
///   ceiling while the pair exchanges or shares m_S = 0 character;
/// * p_i passes 0.5 during a swing larger than the jump threshold spread over
///   the swing window (broad avoided crossings).
///
/// At B = 0 the spectrum is even in B, so the first point of a grid that
/// starts at zero may be a gap minimum. No other boundary point can be.
///
/// Projections are averaged over exactly degenerate levels first, since the
/// eigenvector basis inside a degenerate subspace is arbitrary.
pub fn detect_events(sr: &SweepResult, opts: &SweepOptions) -> Vec<CrossingEvent> {
    let n = sr.len();
    let dim = sr.dimension();
    if n < 2 || dim < 2 {
        return Vec::new();
    }
    let h = sr.step();
    let b0 = sr.field_grid[0];
    let b1 = sr.field_grid[n - 1];
    let w = (math::round(opts.swing_window / h) as usize).max(1);
    let e = &sr.eigenvalues;
    let p = &degeneracy_averaged(e, &sr.projections);
    let gap = |k: usize, i: usize| e[k][i + 1] - e[k][i];
    let mut cands: BTreeMap<(usize, usize), (Signature, f64)> = BTreeMap::new();

    for k in 0..n - 1 {
        for i in 0..dim {
            let dpi = p[k + 1][i] - p[k][i];
            if dpi.abs() <= opts.jump_threshold {
                continue;
            }
            let partner = [i.wrapping_sub(1), i + 1]
                .into_iter()
                .filter(|&j| j < dim)
                .min_by(|&a, &b| {
                    let key = |j: usize| {
                        let lo = i.min(j);
                        (dpi * (p[k + 1][j] - p[k][j]), gap(k, lo).min(gap(k + 1, lo)))
                    };
                    let (ka, kb) = (key(a), key(b));
                    ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
                })
                .expect("dimension ≥ 2 leaves a neighbour");
            let lo = i.min(partner);
            let entry = cands.entry((k, lo)).or_insert((Signature::ProjectionJump, 0.0));
            entry.1 = entry.1.max(dpi.abs());
        }
    }

    let swing = |k: usize, i: usize| {
        let (l, r) = (k.saturating_sub(w), (k + w).min(n - 1));
        (p[l][i] - p[r][i]).abs()
    };
    for i in 0..dim - 1 {
        for k in 0..n - 1 {
            let g = gap(k, i);
            if !(g < opts.gap_ceiling) {
                continue;
            }
            let left = if k > 0 {
                gap(k - 1, i)
            } else if b0 == 0.0 {
                gap(1, i)
            } else {
                continue;
            };
            let right = gap(k + 1, i);
            if !(g <= left && g < right) || left.max(right) < DEGENERATE {
                continue;
            }
            let exchange = swing(k, i).max(swing(k, i + 1));
            let mixed = |j: usize| p[k][j].min(1.0 - p[k][j]) > opts.mix_floor;
            if !(exchange >= opts.jump_threshold || (mixed(i) && mixed(i + 1))) {
                continue;
            }
            if cands.contains_key(&(k, i)) || (k > 0 && cands.contains_key(&(k - 1, i))) {
                continue;
            }
            cands.insert((k, i), (Signature::GapMinimum, exchange));
        }
    }

    for i in 0..dim {
        for k in 0..n - 1 {
            let (x0, x1) = (p[k][i] - 0.5, p[k + 1][i] - 0.5);
            if !(x0 * x1 < 0.0) {
                continue;
            }
            let (l, r) = (k.saturating_sub(w), (k + 1 + w).min(n - 1));
            let s = (p[l][i] - p[r][i]).abs();
            if s < opts.jump_threshold {
                continue;
            }
            let near = (k.saturating_sub(1)..=k + 1)
                .any(|kk| [i.wrapping_sub(1), i].into_iter().any(|j| j < dim && cands.contains_key(&(kk, j))));
            if near {
                continue;
            }
            cands.insert((k, i), (Signature::ProjectionMidpoint, s));
        }
    }

    cands
        .into_iter()
        .map(|((k, i), (signature, jump))| {
            let (lo, hi) = match signature {
                Signature::ProjectionMidpoint => (sr.field_grid[k], sr.field_grid[k + 1]),
                _ => ((sr.field_grid[k] - h).max(b0), (sr.field_grid[k + 1] + h).min(b1)),
            };
            let (levels, min_gap) = match signature {
                Signature::ProjectionMidpoint => {
                    let below = if i > 0 { gap(k, i - 1) } else { f64::INFINITY };
                    let above = if i + 1 < dim { gap(k, i) } else { f64::INFINITY };
                    if below < above {
                        ((i - 1, i), below)
                    } else {
                        ((i, i + 1), above)
                    }
                }
                _ => ((i, i + 1), gap(k, i).min(gap(k + 1, i))),
            };
            CrossingEvent {
                field: 0.5 * (sr.field_grid[k] + sr.field_grid[k + 1]),
                levels,
                min_gap,
                kind: if min_gap < opts.gap_true { CrossingKind::True } else { CrossingKind::Avoided },
                projection_jump: jump,
                bracket: (lo, hi),
                signature,
                tracked_level: i,
            }
        })
        .collect()
}

/// Levels closer than this (MHz) are treated as one degenerate multiplet.
pub(crate) const DEGENERATE: f64 = 1e-6;

fn degeneracy_averaged(e: &[Vec<f64>], p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    e.iter()
        .zip(p)
        .map(|(vals, proj)| {
            let mut out = proj.clone();
            let mut a = 0;
            while a < vals.len() {
                let mut b = a + 1;
                while b < vals.len() && vals[b] - vals[b - 1] < DEGENERATE {
                    b += 1;
                }
                if b - a > 1 {
                    let mean = proj[a..b].iter().sum::<f64>() / (b - a) as f64;
                    out[a..b].fill(mean);
                }
                a = b;
            }
            out
        })
        .collect()
}
