#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rieszcube::quadrature::gauss_legendre_on;
use rieszcube::{rect_kernel, CubeUnion, KernelSet, Lattice, SampleSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: usize, half_width: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-half_width..half_width)).collect()
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Breakpoints of `s_l` on axis `t` of cube `j`, computed from the corners
/// alone: `alpha_j + beta * frac((alpha_k - alpha_j) / beta)` for every `k`.
fn breakpoints(ks: &KernelSet, j: usize, t: usize) -> Vec<f64> {
    let union = ks.union();
    let beta = union.beta();
    let aj = union.corner(j)[t];
    let mut pts: Vec<f64> = union
        .corners()
        .iter()
        .map(|a| aj + beta * ((a[t] - aj) / beta).rem_euclid(1.0))
        .chain([aj, aj + beta])
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    pts
}

/// `(2 pi)^{-d/2} int_E s_l(w) e^{i w.t} dw` by tensor Gauss-Legendre on the
/// panels where `s_l` is constant, sampling `s_l` through `eval_spectral`.
pub fn spectral_quadrature(ks: &KernelSet, l: usize, t: &[f64], nodes: usize) -> Complex64 {
    let d = ks.dim();
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..ks.cubes() {
        let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..d)
            .map(|axis| {
                let pts = breakpoints(ks, j, axis);
                let mut x = Vec::new();
                let mut w = Vec::new();
                for pair in pts.windows(2) {
                    let (px, pw) = gauss_legendre_on(nodes, pair[0], pair[1]);
                    x.extend(px);
                    w.extend(pw);
                }
                (x, w)
            })
            .collect();
        let sizes: Vec<usize> = rules.iter().map(|r| r.0.len()).collect();
        let count: usize = sizes.iter().product();
        let mut omega = vec![0.0; d];
        for idx in 0..count {
            let mut rem = idx;
            let mut weight = 1.0;
            for axis in (0..d).rev() {
                let i = rem % sizes[axis];
                rem /= sizes[axis];
                omega[axis] = rules[axis].0[i];
                weight *= rules[axis].1[i];
            }
            let phase: f64 = omega.iter().zip(t).map(|(a, b)| a * b).sum();
            total += ks.eval_spectral(l, &omega) * Complex64::from_polar(weight, phase);
        }
    }
    total * (2.0 * PI).powf(-(d as f64) / 2.0)
}

/// `sum_{j,s} x_l(j,s) rect_kernel(Q_j^s, t)` term by term.
pub fn direct_kernel(ks: &KernelSet, l: usize, t: &[f64]) -> Complex64 {
    let part = ks.partition();
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..ks.cubes() {
        for s in 0..part.cell_count() {
            total += ks.coefficients().get(l, j, s) * rect_kernel(&part.cell(j, s), t);
        }
    }
    total
}

/// Random coefficients supported on `|n|_inf <= support` inside a lattice of
/// the given radius.
pub fn random_alpha(ks: &KernelSet, radius: usize, support: usize, rng: &mut ChaCha8Rng) -> SampleSet {
    let lattice = Lattice::new(ks.shifts(), ks.beta(), radius);
    let mut alpha = SampleSet::zeros(lattice.clone());
    for idx in 0..lattice.len() {
        let (_, n) = lattice.index_of(idx);
        if n.iter().all(|v| v.unsigned_abs() as usize <= support) {
            alpha.values_mut()[idx] = random_complex(rng);
        }
    }
    alpha
}

/// Corners on a coarse grid of spacing `2 beta` plus an offset in `[0, beta)`,
/// so every pair differs by at least `beta` on some axis.
pub fn union_strategy() -> impl Strategy<Value = CubeUnion> {
    unions_with(1)
}

pub fn unions_with(min_cubes: usize) -> impl Strategy<Value = CubeUnion> {
    (1usize..=3, min_cubes..=4, 0.5f64..2.0).prop_flat_map(|(d, p, beta)| {
        let offset = prop_oneof![0.0f64..1.0, Just(0.0), Just(0.5), Just(0.25)];
        let cell = proptest::collection::vec(-3i64..=3, d);
        let corner = (cell, proptest::collection::vec(offset, d));
        proptest::collection::vec(corner, p).prop_filter_map("distinct grid cells", move |raw| {
            let mut cells: Vec<&Vec<i64>> = raw.iter().map(|(c, _)| c).collect();
            cells.sort();
            cells.dedup();
            if cells.len() != raw.len() {
                return None;
            }
            let corners = raw
                .iter()
                .map(|(c, off)| c.iter().zip(off).map(|(n, o)| beta * (2.0 * *n as f64 + o)).collect())
                .collect();
            CubeUnion::new(d, beta, corners).ok()
        })
    })
}

