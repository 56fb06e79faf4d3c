use spin_atlas_core::prelude::*;
use spin_atlas_core::spin::GAMMA_E;
use spin_atlas_core::sweep::{Prepared, ProbeBasis};
use spin_atlas_core::thermal::{zfs_at, zfs_slope};

fn engine() -> Engine<NativeSolver, Sequential> {
    Engine::new(NativeSolver, Sequential, SweepOptions::default())
}

fn analyze(id: &str, lo: f64, hi: f64, n: usize) -> spin_atlas_core::sweep::Analysis {
    let spec = catalog::get_system(id).unwrap().spec;
    engine().analyze(&spec, FieldRange::new(lo, hi, n).unwrap(), 300.0, &ThermalZfsModel::default()).unwrap()
}

#[test]
fn isolated_nv_gslac_at_closed_form_field() {
    let model = ThermalZfsModel::default();
    let a = analyze("nv", 0.0, 1100.0, 2048);
    assert_eq!(a.features.len(), 1);
    let want = zfs_at(&model, 300.0).unwrap() / GAMMA_E;
    assert!((a.features[0].center - want).abs() < 0.02, "{} vs {want}", a.features[0].center);
    assert_eq!(a.features[0].lines[0].kind, CrossingKind::True);
}

#[test]
fn isolated_nv_temperature_shift_matches_closed_form() {
    let model = ThermalZfsModel::default();
    let spec = catalog::get_system("nv").unwrap().spec;
    let e = engine();
    let a = e.analyze(&spec, FieldRange::new(1000.0, 1050.0, 101).unwrap(), 300.0, &model).unwrap();
    let temps: Vec<f64> = (0..=10).map(|k| 30.0 * k as f64).collect();
    let ts = e.temperature_shift(&spec, &a.features[0], &temps, &model).unwrap();
    assert!(ts.complete());
    assert_eq!(ts.points.len(), temps.len());
    let d300 = zfs_at(&model, 300.0).unwrap();
    for p in &ts.points {
        let closed = (zfs_at(&model, p.t).unwrap() - d300) / GAMMA_E;
        assert!((p.delta_b - closed).abs() < 0.02, "T = {}: {} vs {closed}", p.t, p.delta_b);
    }
    let slope = ts.slope_300k.unwrap();
    assert!((slope - zfs_slope(&model, 300.0).unwrap() / GAMMA_E).abs() < 1e-3, "{slope}");
    assert!((slope + 0.0251).abs() < 0.001);
    let zero = ts.points.iter().find(|p| p.t == 0.0).unwrap();
    assert!((zero.delta_b - 7.22 / GAMMA_E).abs() < 0.02);
}

#[test]
fn grid_refinement_converges() {
    for (id, lo, hi) in [("nv-nv", 500.0, 700.0), ("nv-p1", 480.0, 545.0)] {
        let coarse = analyze(id, lo, hi, 400);
        let fine = analyze(id, lo, hi, 1600);
        assert_eq!(coarse.lines.len(), fine.lines.len(), "{id}");
        for (c, f) in coarse.lines.iter().zip(&fine.lines) {
            assert!((c.field - f.field).abs() < 0.05, "{id}: {} vs {}", c.field, f.field);
        }
    }
}

#[test]
fn sweep_shape_and_positivity() {
    let a = analyze("nv-p1", 0.0, 1100.0, 256);
    let sr = &a.sweep;
    assert_eq!(sr.len(), 256);
    assert_eq!(sr.dimension(), 18);
    assert!(sr.shift_applied > 0.0);
    for (vals, proj) in sr.eigenvalues.iter().zip(&sr.projections) {
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(vals[0] > 0.0);
        assert!((proj.iter().sum::<f64>() - 6.0).abs() < 1e-6);
    }
    assert!((sr.zfs - zfs_at(&ThermalZfsModel::default(), 300.0).unwrap()).abs() < 1e-12);
}

#[test]
fn events_are_well_formed() {
    let a = analyze("nv-p1", 0.0, 1100.0, 2048);
    assert!(!a.events.is_empty());
    for e in &a.events {
        assert_eq!(e.levels.1, e.levels.0 + 1);
        assert!(e.bracket.0 <= e.field && e.field <= e.bracket.1, "{e:?}");
        assert!(e.min_gap >= 0.0);
        assert_eq!(e.kind == CrossingKind::True, e.min_gap < SweepOptions::default().gap_true);
    }
    for w in a.lines.windows(2) {
        assert!(w[1].field - w[0].field > SweepOptions::default().line_merge);
    }
    for f in &a.features {
        assert!(f.span.0 <= f.center && f.center <= f.span.1);
        assert!(f.lines.iter().all(|l| l.field >= f.span.0 && l.field <= f.span.1));
    }
}

#[test]
fn classification_survives_coupling_doubling() {
    let model = ThermalZfsModel::default();
    for (id, lo, hi) in [("nv-nv", 550.0, 650.0), ("nv-p1", 480.0, 545.0)] {
        let spec = catalog::get_system(id).unwrap().spec;
        let r = FieldRange::new(lo, hi, 801).unwrap();
        let base = engine().analyze(&spec, r, 300.0, &model).unwrap();
        let doubled = engine().analyze(&spec.with_scaled_couplings(2.0), r, 300.0, &model).unwrap();
        assert_eq!(base.lines.len(), doubled.lines.len(), "{id}");
        for (a, b) in base.lines.iter().zip(&doubled.lines) {
            assert_eq!(a.kind, b.kind, "{id} at {}", a.field);
            assert!((a.field - b.field).abs() < 1.0);
            if a.kind == CrossingKind::Avoided {
                assert!(b.min_gap > a.min_gap);
            }
        }
    }
}

#[test]
fn projections_conserved_for_small_catalog_systems() {
    for (id, _) in catalog::list_systems() {
        let spec = catalog::get_system(id).unwrap().spec;
        if spec.dimension() > 60 {
            continue;
        }
        let p = Prepared::new(&spec, ProbeBasis::Field).unwrap();
        for b in [0.0, 123.4, 591.0, 1024.0] {
            let (_, proj) = p.spectrum(&NativeSolver, b, 2870.38).unwrap();
            let sum: f64 = proj.iter().sum();
            assert!((sum - spec.dimension() as f64 / 3.0).abs() < 1e-6, "{id} at {b}");
        }
    }
}

#[test]
fn catalog_table_features_small_systems() {
    for (id, want, tol) in [("nv", 1024.0, 2.0), ("nv-nv", 591.0, 2.0), ("nv-p1", 512.0, 2.0), ("2onv-p1", 732.0, 8.0)] {
        let a = analyze(id, want - 40.0, want + 40.0, 150);
        let best = a.features.iter().map(|f| f.center).min_by(|x, y| (x - want).abs().total_cmp(&(y - want).abs()));
        assert!(best.is_some_and(|c| (c - want).abs() <= tol), "{id}: {best:?}");
    }
}
