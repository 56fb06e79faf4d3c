use alloc::vec::Vec;

use super::{CrossingEvent, CrossingFeature, CrossingKind, FeatureKind, SpectralLine};
use crate::math;

/// Default line merge distance, G.
pub const DEFAULT_LINE_MERGE: f64 = 3.0;

/// Split values (already ascending) wherever consecutive entries are more
/// than `gap` apart.
fn runs<T>(items: &[T], key: impl Fn(&T) -> f64, gap: f64) -> Vec<&[T]> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=items.len() {
        if k == items.len() || key(&items[k]) - key(&items[k - 1]) > gap {
            if k > start {
                out.push(&items[start..k]);
            }
            start = k;
        }
    }
    out
}

/// Merge events into lines: single linkage with distance `merge`.
pub fn group_lines(events: &[CrossingEvent], merge: f64) -> Vec<SpectralLine> {
    let mut sorted = events.to_vec();
    sorted.sort_by(|a, b| a.field.total_cmp(&b.field));
    runs(&sorted, |e| e.field, merge)
        .into_iter()
        .map(|g| {
            let fields: Vec<f64> = g.iter().map(|e| e.field).collect();
            let min_gap = g.iter().map(|e| e.min_gap).fold(f64::INFINITY, f64::min);
            let kind = if g.iter().any(|e| e.kind == CrossingKind::True) {
                CrossingKind::True
            } else {
                CrossingKind::Avoided
            };
            SpectralLine { field: math::median(&fields), kind, min_gap, events: g.to_vec() }
        })
        .collect()
}

/// Cluster lines into features: single linkage with distance `radius`.
pub fn cluster_lines(lines: &[SpectralLine], radius: f64) -> Vec<CrossingFeature> {
    let mut sorted = lines.to_vec();
    sorted.sort_by(|a, b| a.field.total_cmp(&b.field));
    runs(&sorted, |l| l.field, radius)
        .into_iter()
        .map(|g| {
            let fields: Vec<f64> = g.iter().map(|l| l.field).collect();
            let trues = g.iter().filter(|l| l.kind == CrossingKind::True).count();
            let kind = match trues {
                0 => FeatureKind::Avoided,
                t if t == g.len() => FeatureKind::True,
                _ => FeatureKind::Mixed,
            };
            CrossingFeature {
                center: math::median(&fields),
                span: (fields[0], fields[fields.len() - 1]),
                lines: g.to_vec(),
                min_gap: g.iter().map(|l| l.min_gap).fold(f64::INFINITY, f64::min),
                kind,
            }
        })
        .collect()
}

/// Events to features with the default line merge distance.
pub fn cluster_features(events: &[CrossingEvent], radius: f64) -> Vec<CrossingFeature> {
    cluster_lines(&group_lines(events, DEFAULT_LINE_MERGE), radius)
}
