use proptest::prelude::*;
use spin_atlas_core::thermal::{zfs_at, zfs_slope, ThermalZfsModel};

const KB: f64 = 8.617333e-2;

fn occ(delta: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        1.0 / ((delta / (KB * t)).exp() - 1.0)
    }
}

fn oracle_d(t: f64) -> f64 {
    2877.6 - 54.91 * occ(58.73, t) - 249.6 * occ(145.5, t)
}

#[test]
fn defaults() {
    let m = ThermalZfsModel::default();
    assert_eq!((m.d0, m.c1, m.c2, m.delta1, m.delta2), (2877.6, -54.91, -249.6, 58.73, 145.5));
    assert_eq!(m.boltzmann, KB);
}

#[test]
fn zero_temperature_is_exact() {
    assert_eq!(zfs_at(&ThermalZfsModel::default(), 0.0).unwrap(), 2877.6);
}

#[test]
fn room_temperature_values() {
    let m = ThermalZfsModel::default();
    let d = zfs_at(&m, 300.0).unwrap();
    assert!((d - oracle_d(300.0)).abs() < 1e-9);
    assert!((d - 2870.38).abs() < 0.01, "{d}");
    assert!((d - 2877.6 + 7.22).abs() < 0.01);
    let s = zfs_slope(&m, 300.0).unwrap();
    assert!((s + 0.0703).abs() < 5e-4, "{s}");
    assert!((s / 2.8024 + 0.0251).abs() < 1e-4);
}

#[test]
fn frozen_out_at_low_temperature() {
    assert!(zfs_slope(&ThermalZfsModel::default(), 10.0).unwrap().abs() < 1e-4);
}

#[test]
fn analytic_slope_matches_finite_difference() {
    let m = ThermalZfsModel::default();
    for t in (50..=300).step_by(50).map(f64::from) {
        let fd = (zfs_at(&m, t + 0.01).unwrap() - zfs_at(&m, t - 0.01).unwrap()) / 0.02;
        assert!((zfs_slope(&m, t).unwrap() - fd).abs() < 1e-6, "T = {t}");
    }
}

#[test]
fn rejects_bad_temperatures() {
    let m = ThermalZfsModel::default();
    for t in [-1.0, f64::NAN, f64::INFINITY] {
        assert!(zfs_at(&m, t).is_err());
        assert!(zfs_slope(&m, t).is_err());
    }
}

proptest! {
    #[test]
    fn matches_independent_formula(t in 0.0f64..400.0) {
        let d = zfs_at(&ThermalZfsModel::default(), t).unwrap();
        prop_assert!((d - oracle_d(t)).abs() < 1e-9);
    }

    #[test]
    fn decreasing(t in 0.0f64..400.0, dt in 0.5f64..50.0) {
        let m = ThermalZfsModel::default();
        prop_assert!(zfs_at(&m, t + dt).unwrap() <= zfs_at(&m, t).unwrap());
        // below ~40 K the change is under one ulp of D
        if t > 40.0 {
            prop_assert!(zfs_at(&m, t + dt).unwrap() < zfs_at(&m, t).unwrap());
        }
        if t > 5.0 {
            prop_assert!(zfs_slope(&m, t).unwrap() < 0.0);
        }
    }
}
