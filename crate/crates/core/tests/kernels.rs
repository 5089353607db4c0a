use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rieszcube::verify::{check_interpolation, check_poisson_residual};
use rieszcube::{demo, rect_kernel, solve_coefficients, CubeUnion, KernelSet, Partition, Rect, ShiftVector};

mod common;
use common::{direct_kernel, rng, random_point, spectral_quadrature, union_strategy};

fn two_interval_set() -> KernelSet {
    KernelSet::with_shifts(demo::two_intervals().union, vec![vec![0.0], vec![PI / 2.0]]).unwrap()
}

#[test]
fn shannon_coefficient() {
    let e = CubeUnion::new(1, 2.0 * PI, vec![vec![0.0]]).unwrap();
    let ks = KernelSet::with_shifts(e, vec![vec![0.0]]).unwrap();
    let x = ks.coefficients().get(0, 0, 0);
    assert!((x - Complex64::new(1.0 / (2.0 * PI).sqrt(), 0.0)).norm() < 1e-15);
    assert!((ks.eval_spectral(0, &[1.0]) - x).norm() == 0.0);
    assert_eq!(ks.eval_spectral(0, &[-0.1]), Complex64::new(0.0, 0.0));
}

#[test]
fn two_interval_hand_solutions() {
    let ks = two_interval_set();
    let r = (2.0 * PI).sqrt();
    let c = ks.coefficients();
    // cell [0.5, 1) has translation set {0, 2}
    assert!((c.get(0, 0, 1) - Complex64::new(r / 2.0, 0.0)).norm() < 1e-14);
    assert!((c.get(1, 0, 1) - Complex64::new(r / 2.0, 0.0)).norm() < 1e-14);
    // cell [0, 0.5) has translation set {0, 3}
    let one_i = Complex64::new(1.0, 1.0);
    assert!((c.get(0, 0, 0) - Complex64::new(0.0, r) / one_i).norm() < 1e-14);
    assert!((c.get(1, 0, 0) - Complex64::new(r, 0.0) / one_i).norm() < 1e-14);
    assert_eq!(ks.eval_spectral(0, &[2.7]), c.get(0, 1, 1));
    assert_eq!(ks.eval_spectral(1, &[1.7]), Complex64::new(0.0, 0.0));
    assert!(c.max_residual <= 1e-15);
}

#[test]
fn rect_kernel_values() {
    let r = Rect::new(vec![-1.0], vec![1.0]).unwrap();
    let norm = (2.0 * PI).sqrt();
    assert!((rect_kernel(&r, &[0.0]) - Complex64::new(2.0 / norm, 0.0)).norm() < 1e-15);
    assert!(rect_kernel(&r, &[PI]).norm() < 1e-15);
    let at_one = rect_kernel(&r, &[1.0]);
    assert!((at_one.re - 0.671_396_1).abs() < 1e-6);
    assert!(at_one.im.abs() < 1e-15);
    // midpoint rule on int_{-1}^{1} e^{ix} dx / sqrt(2 pi)
    let n = 100_000;
    let mid: Complex64 = (0..n)
        .map(|i| Complex64::from_polar(2.0 / n as f64, -1.0 + 2.0 * (i as f64 + 0.5) / n as f64))
        .sum::<Complex64>()
        / norm;
    assert!((mid - at_one).norm() < 1e-9);

    let period = Rect::new(vec![0.0], vec![2.0 * PI]).unwrap();
    for n in 1..6 {
        assert!(rect_kernel(&period, &[n as f64]).norm() < 1e-14);
    }
    let square = Rect::new(vec![0.0, -0.5], vec![0.25, 1.5]).unwrap();
    assert!((rect_kernel(&square, &[0.0, 0.0]).re - 0.5 / (2.0 * PI)).abs() < 1e-16);
}

#[test]
fn rect_kernel_is_continuous_at_zero() {
    let r = Rect::new(vec![0.3, -2.0], vec![1.7, 0.5]).unwrap();
    let origin = rect_kernel(&r, &[0.0, 0.0]);
    for axis in 0..2 {
        let mut prev = f64::INFINITY;
        for eps in [1e-5, 1e-7, 1e-9] {
            let mut t = vec![0.0, 0.0];
            t[axis] = eps;
            let gap = (rect_kernel(&r, &t) - origin).norm();
            assert!(gap <= prev);
            assert!(gap < 10.0 * eps);
            prev = gap;
        }
    }
    // either side of the Taylor switch agrees
    let below = rect_kernel(&r, &[0.999_999e-6, 0.0]);
    let above = rect_kernel(&r, &[1.000_001e-6, 0.0]);
    assert!((below - above).norm() < 1e-11);
}

#[test]
fn kernel_at_origin_matches_midpoint_integral() {
    let ks = two_interval_set();
    let n = 100_000;
    for l in 0..2 {
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..2 {
            let a = ks.union().corner(j)[0];
            for i in 0..n {
                sum += ks.eval_spectral(l, &[a + (i as f64 + 0.5) / n as f64]);
            }
        }
        let mid = sum / n as f64 / (2.0 * PI).sqrt();
        assert!((ks.eval_kernel(l, &[0.0]) - mid).norm() <= 1e-6);
    }
}

#[test]
fn kernels_match_spectral_quadrature_on_demos() {
    for d in demo::all().into_iter().filter(|d| d.union.dim() <= 2) {
        let ks = KernelSet::build(d.union.clone(), d.seed, 1e-3, 64).unwrap();
        let mut g = rng(11);
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let t = random_point(&mut g, ks.dim(), 10.0);
            for l in 0..ks.cubes() {
                let q = spectral_quadrature(&ks, l, &t, 24);
                worst = worst.max((ks.eval_kernel(l, &t) - q).norm());
            }
        }
        assert!(worst <= 1e-5, "{}: {worst}", d.name);
    }
}

#[test]
fn demos_have_small_residuals() {
    for d in demo::all() {
        let ks = KernelSet::build(d.union.clone(), d.seed, 1e-3, 64).unwrap();
        assert!(ks.coefficients().max_residual <= 1e-10, "{}", d.name);
        assert!(check_poisson_residual(&ks, 100, 3) <= 1e-9, "{}", d.name);
        assert!(check_interpolation(&ks, 2) <= 1e-8, "{}", d.name);
    }
}

#[test]
fn single_cube_poisson_residual_vanishes() {
    let e = CubeUnion::new(2, 0.7, vec![vec![1.0, 2.0]]).unwrap();
    let ks = KernelSet::build(e, 5, 1e-3, 64).unwrap();
    assert!(check_poisson_residual(&ks, 100, 0) <= 1e-15);
}

#[test]
fn solve_matches_kernel_set() {
    let d = demo::three_squares();
    let part = Partition::build(&d.union).unwrap();
    let ks = KernelSet::build(d.union.clone(), d.seed, 1e-3, 64).unwrap();
    let shifts = ShiftVector::from_shifts(&part, ks.shifts().shifts.clone()).unwrap();
    let table = solve_coefficients(&part, &shifts).unwrap();
    assert_eq!(table.values(), ks.coefficients().values());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rect_kernel_conjugate_symmetry(
        lo in proptest::collection::vec(-5.0f64..5.0, 3),
        width in proptest::collection::vec(0.01f64..4.0, 3),
        t in proptest::collection::vec(-50.0f64..50.0, 3),
    ) {
        let hi: Vec<f64> = lo.iter().zip(&width).map(|(a, w)| a + w).collect();
        let r = Rect::new(lo, hi).unwrap();
        let neg: Vec<f64> = t.iter().map(|x| -x).collect();
        prop_assert!((rect_kernel(&r, &neg) - rect_kernel(&r, &t).conj()).norm() <= 1e-14);
    }

    #[test]
    fn constructed_kernels_satisfy_invariants(e in union_strategy(), seed in 0u64..1000, t in proptest::collection::vec(-10.0f64..10.0, 3)) {
        let Ok(ks) = KernelSet::build(e.clone(), seed, 1e-3, 64) else { return Ok(()) };
        prop_assert!(ks.coefficients().max_residual <= 1e-10);
        prop_assert!(check_poisson_residual(&ks, 50, seed) <= 1e-9);
        prop_assert!(check_interpolation(&ks, 1) <= 1e-8);
        let t = &t[..e.dim()];
        for l in 0..ks.cubes() {
            let fast = ks.eval_kernel(l, t);
            let direct = direct_kernel(&ks, l, t);
            prop_assert!((fast - direct).norm() <= 1e-12 * (1.0 + direct.norm()));
        }
    }
}
