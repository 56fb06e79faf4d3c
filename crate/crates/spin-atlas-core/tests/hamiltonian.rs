use proptest::prelude::*;
use spin_atlas_core::eigen::{BlockPlan, EigenSolver, NativeSolver};
use spin_atlas_core::linalg::{HermitianMatrix, Matrix, C64};
use spin_atlas_core::spin::{
    build_hamiltonian, AxisOrientation, CouplingSpec, InteractionTensor, SiteSpec, SpeciesKind, SpinSystemSpec,
    GAMMA_E,
};
use spin_atlas_core::sweep::{Prepared, ProbeBasis};

/// Roots of λ³ + aλ² + bλ + c with three real roots, ascending.
fn cubic_roots(a: f64, b: f64, c: f64) -> [f64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    if p.abs() < 1e-300 {
        let r = (-q).cbrt() - a / 3.0;
        return [r; 3];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    let mut r = [0.0; 3];
    for (k, v) in r.iter_mut().enumerate() {
        *v = m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - a / 3.0;
    }
    r.sort_by(f64::total_cmp);
    r
}

fn hermitian3(d: [f64; 3], off: [(f64, f64); 3]) -> HermitianMatrix {
    let [(r01, i01), (r02, i02), (r12, i12)] = off;
    let m = Matrix::from_fn(3, |i, j| match (i, j) {
        (i, j) if i == j => C64::new(d[i], 0.0),
        (0, 1) => C64::new(r01, i01),
        (1, 0) => C64::new(r01, -i01),
        (0, 2) => C64::new(r02, i02),
        (2, 0) => C64::new(r02, -i02),
        (1, 2) => C64::new(r12, i12),
        _ => C64::new(r12, -i12),
    });
    HermitianMatrix::new(m).unwrap()
}

fn char_poly_roots(h: &HermitianMatrix) -> [f64; 3] {
    let e = |i, j| h[(i, j)];
    let tr = (e(0, 0) + e(1, 1) + e(2, 2)).re;
    let minors = (e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0) + e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0) + e(1, 1) * e(2, 2)
        - e(1, 2) * e(2, 1))
        .re;
    let det = (e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0)))
        .re;
    cubic_roots(-tr, minors, -det)
}

#[test]
fn single_nv_closed_form() {
    let spec = SpinSystemSpec::new(vec![SiteSpec::nv(AxisOrientation::Z)], vec![], 0).unwrap();
    let v = NativeSolver.eigvalsh(&build_hamiltonian(&spec, 0.0, 2870.0).unwrap()).unwrap();
    for (a, b) in v.iter().zip([0.0, 2870.0, 2870.0]) {
        assert!((a - b).abs() < 1e-9, "{v:?}");
    }
    let b = 512.2;
    let v = NativeSolver.eigvalsh(&build_hamiltonian(&spec, b, 2870.0).unwrap()).unwrap();
    let want = [0.0, 2870.0 - GAMMA_E * b, 2870.0 + GAMMA_E * b];
    for (a, w) in v.iter().zip(want) {
        assert!((a - w).abs() < 1e-9, "{v:?} vs {want:?}");
    }
}

#[test]
fn two_by_two_closed_form() {
    for (a, d, re, im) in [(1.0, -2.0, 0.5, 0.25), (3.0, 3.0, 0.0, 1.0), (0.0, 10.0, -4.0, 0.0)] {
        let m = Matrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => C64::new(a, 0.0),
            (1, 1) => C64::new(d, 0.0),
            (0, 1) => C64::new(re, im),
            _ => C64::new(re, -im),
        });
        let v = NativeSolver.eigvalsh(&HermitianMatrix::new(m).unwrap()).unwrap();
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + re * re + im * im).sqrt();
        assert!((v[0] - (mean - r)).abs() < 1e-9 && (v[1] - (mean + r)).abs() < 1e-9);
    }
}

#[test]
fn off_axis_nv_zero_field_is_axis_independent() {
    for k in 0..4 {
        let spec = SpinSystemSpec::new(vec![SiteSpec::nv(AxisOrientation::tetrahedral(k))], vec![], 0).unwrap();
        let v = NativeSolver.eigvalsh(&build_hamiltonian(&spec, 0.0, 2870.0).unwrap()).unwrap();
        assert!(v[0].abs() < 1e-9 && (v[1] - 2870.0).abs() < 1e-9 && (v[2] - 2870.0).abs() < 1e-9);
    }
}

fn arb_axis() -> impl Strategy<Value = AxisOrientation> {
    prop_oneof![
        (0usize..4).prop_map(AxisOrientation::tetrahedral),
        (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(c, phi)| {
            let s = (1.0 - c * c).sqrt();
            AxisOrientation::new(s * phi.cos(), s * phi.sin(), c).unwrap()
        }),
    ]
}

#[derive(Debug, Clone)]
enum Extra {
    P1 { axis: AxisOrientation, nucleus: bool },
    Carbon { axis: AxisOrientation },
    Nv { axis: AxisOrientation },
}

fn arb_extra() -> impl Strategy<Value = Extra> {
    prop_oneof![
        (arb_axis(), any::<bool>()).prop_map(|(axis, nucleus)| Extra::P1 { axis, nucleus }),
        arb_axis().prop_map(|axis| Extra::Carbon { axis }),
        arb_axis().prop_map(|axis| Extra::Nv { axis }),
    ]
}

fn build(probe_axis: AxisOrientation, extras: &[Extra], j: f64) -> SpinSystemSpec {
    let mut sites = vec![SiteSpec::nv(probe_axis)];
    let mut couplings = Vec::new();
    for e in extras {
        match e {
            Extra::P1 { axis, nucleus } => {
                let p = sites.len();
                sites.push(SiteSpec::new(SpeciesKind::P1Electron, *axis));
                couplings.push(CouplingSpec { site_a: 0, site_b: p, tensor: InteractionTensor::lab_diagonal(j, j, 0.0) });
                if *nucleus {
                    sites.push(
                        SiteSpec::new(SpeciesKind::N14, *axis)
                            .with_hyperfine(p, InteractionTensor::axial(81.3, 114.0, *axis))
                            .with_quadrupole(InteractionTensor::quadrupole(-3.97, *axis)),
                    );
                }
            }
            Extra::Carbon { axis } => {
                sites.push(SiteSpec::new(SpeciesKind::C13, *axis).with_hyperfine(0, InteractionTensor::axial(120.3, 199.7, *axis)))
            }
            Extra::Nv { axis } => {
                let p = sites.len();
                sites.push(SiteSpec::nv(*axis));
                couplings.push(CouplingSpec { site_a: 0, site_b: p, tensor: InteractionTensor::lab_diagonal(j, j, 0.0) });
            }
        }
    }
    SpinSystemSpec::new(sites, couplings, 0).unwrap()
}

fn arb_system() -> impl Strategy<Value = SpinSystemSpec> {
    (arb_axis(), prop::collection::vec(arb_extra(), 0..3), 0.5f64..20.0)
        .prop_map(|(a, ex, j)| build(a, &ex, j))
        .prop_filter("keep dense solves small", |s| s.dimension() <= 60)
}

fn frob(m: &Matrix) -> f64 {
    m.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hermitian_and_reconstructs(spec in arb_system(), b in 0.0f64..1100.0, d in 2860.0f64..2880.0) {
        let h = build_hamiltonian(&spec, b, d).unwrap();
        prop_assert!(h.as_matrix().hermiticity_error() < 1e-9);
        let e = NativeSolver.eigh(&h).unwrap();
        let n = h.dim();
        let v = Matrix::from_fn(n, |i, k| e.vector(k)[i]);
        let lam = Matrix::from_fn(n, |i, k| if i == k { C64::new(e.values[k], 0.0) } else { C64::new(0.0, 0.0) });
        let mut r = h.as_matrix().matmul(&v);
        r.add_scaled(&v.matmul(&lam), C64::new(-1.0, 0.0));
        prop_assert!(frob(&r) / frob(h.as_matrix()) < 1e-6);
        let mut o = v.adjoint().matmul(&v);
        o.add_scaled(&Matrix::identity(n), C64::new(-1.0, 0.0));
        prop_assert!(o.max_abs() < 1e-9);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn block_solve_matches_dense(spec in arb_system(), b in 0.0f64..1100.0) {
        let p = Prepared::new(&spec, ProbeBasis::Field).unwrap();
        let dense = NativeSolver.eigvalsh(&p.hamiltonian(b, 2870.0)).unwrap();
        let blocked = p.eigenvalues(&NativeSolver, b, 2870.0).unwrap();
        let single = BlockPlan::single(p.dimension()).eigenvalues(&p.hamiltonian(b, 2870.0), &NativeSolver).unwrap();
        for ((x, y), z) in dense.iter().zip(&blocked).zip(&single) {
            prop_assert!((x - y).abs() < 1e-8 && (x - z).abs() < 1e-8);
        }
    }

    #[test]
    fn projections_sum_to_a_third(spec in arb_system(), b in 0.0f64..1100.0, axis_basis in any::<bool>()) {
        let basis = if axis_basis { ProbeBasis::NvAxis } else { ProbeBasis::Field };
        let p = Prepared::new(&spec, basis).unwrap();
        let (_, proj) = p.spectrum(&NativeSolver, b, 2870.38).unwrap();
        let sum: f64 = proj.iter().sum();
        prop_assert!((sum - p.dimension() as f64 / 3.0).abs() < 1e-6);
        prop_assert!(proj.iter().all(|x| (-1e-12..=1.0 + 1e-12).contains(x)));
    }

    #[test]
    fn three_by_three_matches_characteristic_polynomial(
        d in prop::array::uniform3(-100.0f64..100.0),
        off in prop::array::uniform3((-50.0f64..50.0, -50.0f64..50.0)),
    ) {
        let h = hermitian3(d, off);
        let v = NativeSolver.eigvalsh(&h).unwrap();
        let r = char_poly_roots(&h);
        for (a, b) in v.iter().zip(r) {
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{v:?} vs {r:?}");
        }
    }

    #[test]
    fn json_round_trip_is_identity(spec in arb_system()) {
        let back = SpinSystemSpec::from_json(&spec.to_json()).unwrap();
        prop_assert_eq!(back, spec);
    }
}

/// Probe NV plus `k` identical units on a shared axis, identically coupled.
fn symmetric_cluster(probe: AxisOrientation, unit: AxisOrientation, k: usize, nucleus: bool, j: f64) -> SpinSystemSpec {
    build(probe, &vec![Extra::P1 { axis: unit, nucleus }; k], j)
}

/// (eigenvalue, summed probe weight) per degenerate multiplet.
fn multiplets(vals: &[f64], proj: &[f64]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (&v, &p) in vals.iter().zip(proj) {
        match out.last_mut() {
            Some(last) if v - last.0 < 1e-7 => last.1 += p,
            _ => out.push((v, p)),
        }
    }
    out
}

fn dense_field_projections(spec: &SpinSystemSpec, b: f64, d: f64) -> (Vec<f64>, Vec<f64>) {
    let h = build_hamiltonian(spec, b, d).unwrap();
    let e = NativeSolver.eigh(&h).unwrap();
    let stride: usize = spec.dims()[1..].iter().product();
    let proj = (0..e.dim())
        .map(|k| e.vector(k).iter().enumerate().filter(|(g, _)| (g / stride) % 3 == 1).map(|(_, x)| x.norm_sqr()).sum())
        .collect();
    (e.values, proj)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exchange_sectors_match_dense(
        probe in arb_axis(),
        unit in arb_axis(),
        k in 2usize..4,
        nucleus in any::<bool>(),
        j in 0.5f64..20.0,
        b in 0.0f64..1100.0,
    ) {
        prop_assume!(!(nucleus && k == 3));
        let spec = symmetric_cluster(probe, unit, k, nucleus, j);
        let p = Prepared::new(&spec, ProbeBasis::Field).unwrap();
        prop_assert!(p.block_sizes().len() > 1);
        prop_assert_eq!(p.block_sizes().iter().sum::<usize>(), p.dimension());
        let (vals, proj) = p.spectrum(&NativeSolver, b, 2870.38).unwrap();
        let (dv, dp) = dense_field_projections(&spec, b, 2870.38);
        for (x, y) in vals.iter().zip(&dv) {
            prop_assert!((x - y).abs() < 1e-8);
        }
        let (m, dm) = (multiplets(&vals, &proj), multiplets(&dv, &dp));
        prop_assert_eq!(m.len(), dm.len());
        for (x, y) in m.iter().zip(&dm) {
            prop_assert!((x.1 - y.1).abs() < 1e-6, "{:?} vs {:?}", x, y);
        }
        let e = p.eigen(&NativeSolver, b, 2870.38).unwrap();
        let h = p.hamiltonian(b, 2870.38);
        let n = h.dim();
        for i in 0..n {
            let v = e.vector(i);
            let hv: Vec<C64> = (0..n).map(|r| (0..n).map(|c| h[(r, c)] * v[c]).sum()).collect();
            let res: f64 = hv.iter().zip(v).map(|(a, x)| (a - x * e.values[i]).norm_sqr()).sum();
            prop_assert!(res.sqrt() < 1e-6 * (1.0 + e.values[i].abs()));
        }
    }
}

#[test]
fn three_identical_nitrogen_units_split_into_sectors() {
    let spec = symmetric_cluster(AxisOrientation::tetrahedral(1), AxisOrientation::tetrahedral(1), 3, true, 5.0);
    let p = Prepared::new(&spec, ProbeBasis::Field).unwrap();
    assert_eq!(p.dimension(), 648);
    assert!(*p.block_sizes().iter().max().unwrap() <= 210, "{:?}", p.block_sizes());
    for b in [0.0, 347.0] {
        let blocked = p.eigenvalues(&NativeSolver, b, 2870.38).unwrap();
        let dense = NativeSolver.eigvalsh(&p.hamiltonian(b, 2870.38)).unwrap();
        for (x, y) in blocked.iter().zip(&dense) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
