use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use spin_atlas_core::trace::{auto_seeds, fit_dips, refit, side_peak_separations, FitOptions, Trace};

/// (center, hwhm, depth)
type DipSpec = (f64, f64, f64);

fn synth(lo: f64, hi: f64, n: usize, base: (f64, f64), dips: &[DipSpec]) -> (Vec<f64>, Vec<f64>) {
    let field: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let pl = field
        .iter()
        .map(|&b| {
            let s: f64 = dips.iter().map(|&(c, w, d)| d * w * w / ((b - c) * (b - c) + w * w)).sum();
            (base.0 + base.1 * b) * (1.0 - s)
        })
        .collect();
    (field, pl)
}

#[test]
fn monte_carlo_three_dips() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, 1e-3).unwrap();
    let mut good = 0;
    for _ in 0..100 {
        let c0 = rng.random_range(505.0..515.0);
        let truth = [
            (c0 - rng.random_range(8.0..12.0), rng.random_range(1.0..2.0), rng.random_range(0.01..0.03)),
            (c0, rng.random_range(1.0..2.0), rng.random_range(0.02..0.05)),
            (c0 + rng.random_range(8.0..12.0), rng.random_range(1.0..2.0), rng.random_range(0.01..0.03)),
        ];
        let (field, mut pl) = synth(470.0, 550.0, 801, (1.0, 1e-4), &truth);
        for p in &mut pl {
            *p *= 1.0 + noise.sample(&mut rng);
        }
        let trace = Trace::new(field, pl, None).unwrap();
        let seeds: Vec<f64> = truth.iter().map(|t| t.0 + rng.random_range(-0.5..0.5)).collect();
        let fit = fit_dips(&trace, &seeds, &FitOptions::default()).unwrap();
        let centers_ok = fit.dips.iter().zip(&truth).all(|(d, t)| (d.center - t.0).abs() < 0.1);
        let seps = side_peak_separations(&fit, c0);
        let mut want = [truth[1].0 - truth[0].0, truth[2].0 - truth[1].0];
        want.sort_by(f64::total_cmp);
        let seps_ok = seps.len() == 2 && seps.iter().zip(want).all(|(s, w)| (s - w).abs() < 0.2);
        good += usize::from(centers_ok && seps_ok);
    }
    assert!(good >= 95, "{good}/100 draws recovered");
}

#[test]
fn uncertainties_are_calibrated_in_order_of_magnitude() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 1e-3).unwrap();
    let truth = [(500.0, 1.5, 0.03)];
    let mut z = Vec::new();
    for _ in 0..50 {
        let (field, mut pl) = synth(480.0, 520.0, 401, (1.0, 0.0), &truth);
        for p in &mut pl {
            *p += noise.sample(&mut rng);
        }
        let fit = fit_dips(&Trace::new(field, pl, None).unwrap(), &[500.3], &FitOptions::default()).unwrap();
        z.push((fit.dips[0].center - 500.0) / fit.dips[0].center_err);
    }
    let rms = (z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64).sqrt();
    assert!((0.5..2.0).contains(&rms), "normalised error rms {rms}");
}

#[test]
fn auto_seeds_find_separated_dips() {
    let truth = [(300.0, 1.0, 0.02), (320.0, 1.0, 0.03), (345.0, 1.5, 0.02)];
    let (field, mut pl) = synth(280.0, 360.0, 801, (1.0, 0.0), &truth);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 5e-4).unwrap();
    for p in &mut pl {
        *p += noise.sample(&mut rng);
    }
    let seeds = auto_seeds(&Trace::new(field, pl, None).unwrap(), 8.0);
    assert_eq!(seeds.len(), 3, "{seeds:?}");
    for (s, t) in seeds.iter().zip(truth) {
        assert!((s - t.0).abs() < 0.5);
    }
}

fn arb_dips() -> impl Strategy<Value = Vec<DipSpec>> {
    (490.0f64..510.0, 6.0f64..12.0, 0.8f64..2.0, 0.01f64..0.05, 0.01f64..0.05).prop_map(|(c, s, w, d1, d2)| {
        vec![(c - s, w, d1), (c + s, w, d2)]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn refit_is_idempotent(dips in arb_dips()) {
        let (field, pl) = synth(460.0, 540.0, 401, (2.0, 1e-3), &dips);
        let t = Trace::new(field, pl, None).unwrap();
        let opts = FitOptions::default();
        let seeds: Vec<f64> = dips.iter().map(|d| d.0 + 0.3).collect();
        let a = fit_dips(&t, &seeds, &opts).unwrap();
        let b = refit(&t, &a, &opts).unwrap();
        for (x, y) in a.dips.iter().zip(&b.dips) {
            prop_assert!((x.center - y.center).abs() < 1e-6);
            prop_assert!((x.hwhm - y.hwhm).abs() < 1e-6);
            prop_assert!((x.depth - y.depth).abs() < 1e-8);
        }
    }

    #[test]
    fn field_shift_equivariance(dips in arb_dips(), shift in -200.0f64..200.0) {
        let (field, pl) = synth(460.0, 540.0, 401, (1.0, 0.0), &dips);
        let seeds: Vec<f64> = dips.iter().map(|d| d.0 - 0.2).collect();
        let opts = FitOptions::default();
        let a = fit_dips(&Trace::new(field.clone(), pl.clone(), None).unwrap(), &seeds, &opts).unwrap();
        let moved: Vec<f64> = field.iter().map(|b| b + shift).collect();
        let ms: Vec<f64> = seeds.iter().map(|s| s + shift).collect();
        let b = fit_dips(&Trace::new(moved, pl, None).unwrap(), &ms, &opts).unwrap();
        for (x, y) in a.dips.iter().zip(&b.dips) {
            prop_assert!((y.center - x.center - shift).abs() < 1e-5);
            prop_assert!((y.hwhm - x.hwhm).abs() < 1e-5);
            prop_assert!((y.depth - x.depth).abs() < 1e-7);
        }
    }

    #[test]
    fn pl_scale_invariance(dips in arb_dips(), scale in 0.01f64..1000.0) {
        let (field, pl) = synth(460.0, 540.0, 401, (1.0, 2e-4), &dips);
        let seeds: Vec<f64> = dips.iter().map(|d| d.0 + 0.2).collect();
        let opts = FitOptions::default();
        let a = fit_dips(&Trace::new(field.clone(), pl.clone(), None).unwrap(), &seeds, &opts).unwrap();
        let scaled: Vec<f64> = pl.iter().map(|p| p * scale).collect();
        let b = fit_dips(&Trace::new(field, scaled, None).unwrap(), &seeds, &opts).unwrap();
        prop_assert!((b.baseline.0 / a.baseline.0 - scale).abs() < 1e-6 * scale);
        for (x, y) in a.dips.iter().zip(&b.dips) {
            prop_assert!((x.center - y.center).abs() < 1e-6);
            prop_assert!((x.depth - y.depth).abs() < 1e-8);
        }
    }

    #[test]
    fn noise_free_recovery(dips in arb_dips(), slope in -1e-3f64..1e-3) {
        let (field, pl) = synth(460.0, 540.0, 401, (1.0, slope), &dips);
        let seeds: Vec<f64> = dips.iter().map(|d| d.0 + 0.4).collect();
        let fit = fit_dips(&Trace::new(field, pl, None).unwrap(), &seeds, &FitOptions::default()).unwrap();
        prop_assert!(fit.converged);
        for (d, t) in fit.dips.iter().zip(&dips) {
            prop_assert!((d.center - t.0).abs() < 1e-6);
            prop_assert!((d.hwhm - t.1).abs() < 1e-6);
            prop_assert!((d.depth - t.2).abs() < 1e-8);
            prop_assert!(!d.removable);
        }
    }
}
