//! Numerical certificates for the Riesz-basis claims.
//!
//! Frame bounds come from extremal eigenvalues of finite Gram sections of
//! the exponential system over `L^2(E)`; biorthogonality, system and
//! Poisson-identity residuals are measured directly; densities are counted
//! on half-open windows.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CubeUnion, GeometryError, Rect};
use crate::kernels::{interval_transform, system_residual, KernelSet};
use crate::reconstruct::Lattice;
use crate::shifts::{min_normalized_det, ShiftVector};

/// Largest Gram section `frame_bounds` will assemble.
pub const MAX_GRAM: usize = 4096;
pub const EIGEN_TOL: f64 = 1e-8;
const MAX_LANCZOS_STEPS: usize = 1500;
/// Refinement floor for covers, relative to the shortest box side.
const MIN_COVER_RATIO: f64 = 1e-6;
const MAX_COVER_CELLS: usize = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("eigenvalue iteration stalled after {iterations} steps (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
    #[error("Gram section of size {0} exceeds {MAX_GRAM}")]
    SectionTooLarge(usize),
    #[error("window of side {h} exceeds the populated extent {extent}")]
    WindowTooLarge { h: f64, extent: f64 },
    #[error("window side must be positive, got {0}")]
    InvalidWindow(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error("cover needs at least one box")]
    NoBoxes,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("boxes {first} and {second} overlap")]
    Overlap { first: usize, second: usize },
    #[error("no inner cover before the grid side fell below {floor:e}")]
    EmptyInner { floor: f64 },
    #[error("grid with side {beta:e} would need more than {MAX_COVER_CELLS} cells")]
    TooFine { beta: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Extremal eigenvalues of the `|E|`-normalized Gram section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub radius: usize,
    pub size: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub h: f64,
    pub n_plus: usize,
    pub n_minus: usize,
    pub upper: f64,
    pub lower: f64,
    pub nyquist: f64,
}

/// `int_E e^{i (lambda - mu) . x} dx`.
pub fn gram_entry(union: &CubeUnion, lambda: &[f64], mu: &[f64]) -> Complex64 {
    let beta = union.beta();
    let delta: Vec<f64> = lambda.iter().zip(mu).map(|(a, b)| a - b).collect();
    union
        .corners()
        .iter()
        .map(|corner| {
            corner
                .iter()
                .zip(&delta)
                .map(|(a, d)| interval_transform(*a, a + beta, *d))
                .product::<Complex64>()
        })
        .sum()
}

/// Gram matrix of `{e^{i lambda . x}}` over the truncated lattice, divided by `|E|`.
pub fn gram_matrix(union: &CubeUnion, lattice: &Lattice) -> Vec<Complex64> {
    let points = lattice.points();
    let n = points.len();
    let measure = union.measure();
    let mut g = vec![Complex64::new(0.0, 0.0); n * n];
    g.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
        for (c, v) in row.iter_mut().enumerate() {
            *v = if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                gram_entry(union, &points[r], &points[c]) / measure
            };
        }
    });
    g
}

/// Extremal eigenvalues `(min, max)` of a Hermitian matrix by Lanczos with
/// full reorthogonalization. Converged once both extreme Ritz pairs have
/// residual `beta_k |y_k| <= EIGEN_TOL`, or when the Krylov space is the
/// whole space.
pub fn extremal_eigenvalues(g: &[Complex64], n: usize, seed: u64) -> Result<(f64, f64), VerifyError> {
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let norm = |a: &[Complex64]| a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let max_steps = n.min(MAX_LANCZOS_STEPS);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_vector = |basis: &[Vec<Complex64>]| -> Option<Vec<Complex64>> {
        for _ in 0..4 {
            let mut v: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            for _ in 0..2 {
                for b in basis {
                    let c = dot(b, &v);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let len = norm(&v);
            if len > 1e-8 {
                v.iter_mut().for_each(|x| *x /= len);
                return Some(v);
            }
        }
        None
    };

    let mut basis: Vec<Vec<Complex64>> = vec![random_vector(&[]).expect("nonempty matrix")];
    let mut alpha: Vec<f64> = Vec::new();
    let mut off: Vec<f64> = Vec::new();
    let mut next_check = 8usize;
    let mut residual = f64::INFINITY;
    loop {
        let k = basis.len();
        let v = &basis[k - 1];
        let mut w: Vec<Complex64> = g
            .par_chunks(n)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect();
        alpha.push(dot(v, &w).re);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = norm(&w);
        let exhausted = k == n;
        if exhausted || k == max_steps || k >= next_check {
            next_check = (next_check * 3 / 2).max(k + 1);
            let (lo, hi, res) = ritz_extremes(&alpha, &off, beta);
            residual = res;
            if res <= EIGEN_TOL || exhausted {
                return Ok((lo, hi));
            }
            if k == max_steps {
                return Err(VerifyError::Convergence { iterations: k, residual });
            }
        }
        if beta <= 1e-12 * scale {
            // invariant subspace: continue from a fresh orthogonal direction
            match random_vector(&basis) {
                Some(fresh) => {
                    off.push(0.0);
                    basis.push(fresh);
                }
                None => {
                    let (lo, hi, _) = ritz_extremes(&alpha, &off, 0.0);
                    return Ok((lo, hi));
                }
            }
        } else {
            off.push(beta);
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(w);
        }
        if basis.len() > max_steps {
            return Err(VerifyError::Convergence { iterations: max_steps, residual });
        }
    }
}

/// Extreme eigenvalues of the Lanczos tridiagonal and the larger of their
/// residual bounds `|next_beta * y_last|`.
fn ritz_extremes(alpha: &[f64], off: &[f64], next_beta: f64) -> (f64, f64, f64) {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            off[r]
        } else if c + 1 == r {
            off[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (mut imin, mut imax) = (0, 0);
    for i in 0..k {
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
        if eig.eigenvalues[i] > eig.eigenvalues[imax] {
            imax = i;
        }
    }
    let res = |i: usize| (next_beta * eig.eigenvectors[(k - 1, i)]).abs();
    (eig.eigenvalues[imin], eig.eigenvalues[imax], res(imin).max(res(imax)))
}

/// Extremal eigenvalues of the normalized Gram section at radius `radius`.
pub fn frame_bounds(union: &CubeUnion, shifts: &ShiftVector, radius: usize) -> Result<GramReport, VerifyError> {
    let lattice = Lattice::new(shifts, union.beta(), radius);
    let n = lattice.len();
    if n > MAX_GRAM {
        return Err(VerifyError::SectionTooLarge(n));
    }
    let g = gram_matrix(union, &lattice);
    let (lo, hi) = extremal_eigenvalues(&g, n, 0x5eed)?;
    Ok(GramReport {
        radius,
        size: n,
        lambda_min: lo.clamp(0.0, 1.0),
        lambda_max: hi.max(1.0),
    })
}

/// `max |S_l(W n + k_s - k_l) - [n = 0][l = s]|` over `l, s` and `|n|_inf <= radius`.
pub fn check_interpolation(kernels: &KernelSet, radius: usize) -> f64 {
    let p = kernels.cubes();
    let d = kernels.dim();
    let w = kernels.w_scale();
    let block = Lattice::from_raw(vec![vec![0.0; d]], kernels.beta(), radius);
    let shifts = &kernels.shifts().shifts;
    (0..block.len())
        .into_par_iter()
        .map(|idx| {
            let (_, n) = block.index_of(idx);
            let origin = n.iter().all(|v| *v == 0);
            let mut worst = 0.0f64;
            for s in 0..p {
                for l in 0..p {
                    let t: Vec<f64> = (0..d)
                        .map(|axis| w * n[axis] as f64 + shifts[s][axis] - shifts[l][axis])
                        .collect();
                    let target = if origin && l == s { 1.0 } else { 0.0 };
                    let dev = (kernels.eval_kernel(l, &t) - target).norm();
                    worst = worst.max(dev);
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Draws `trials` points uniformly from `E` (deterministically from `seed`).
pub fn random_points_in(union: &CubeUnion, trials: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            let j = rng.random_range(0..union.len());
            union
                .corner(j)
                .iter()
                .map(|a| a + union.beta() * rng.random::<f64>())
                .collect()
        })
        .collect()
}

/// `max |(beta / sqrt(2 pi))^d sum_l s_l(w) e^{i beta n . k_l} - [n = 0]|`
/// over random `w` in `E` and `n` in the translation set of `w`'s cell.
pub fn check_poisson_residual(kernels: &KernelSet, trials: usize, seed: u64) -> f64 {
    let union = kernels.union();
    let partition = kernels.partition();
    let beta = kernels.beta();
    let scale = (beta / (2.0 * std::f64::consts::PI).sqrt()).powi(kernels.dim() as i32);
    let shifts = &kernels.shifts().shifts;
    let mut worst = 0.0f64;
    for omega in random_points_in(union, trials, seed) {
        let (j, s) = partition
            .cell_of(union, &omega)
            .expect("sampled point lies in the union");
        let values: Vec<Complex64> = (0..kernels.cubes())
            .map(|l| kernels.eval_spectral(l, &omega))
            .collect();
        for m in partition.translation_set(j, s) {
            let total: Complex64 = values
                .iter()
                .zip(shifts)
                .map(|(v, k)| {
                    let phase: f64 = m.iter().zip(k).map(|(a, b)| *a as f64 * b).sum();
                    v * Complex64::from_polar(1.0, beta * phase)
                })
                .sum();
            let target = if m.iter().all(|v| *v == 0) { 1.0 } else { 0.0 };
            worst = worst.max((total * scale - target).norm());
        }
    }
    worst
}

/// Counts `#{n in [-N, N] : a <= W n + k < b}` on one axis.
fn count_axis(w: f64, k: f64, radius: i64, a: f64, b: f64) -> usize {
    let lo = (((a - k) / w).ceil() as i64 - 1).max(-radius);
    let hi = (((b - k) / w).floor() as i64 + 1).min(radius);
    (lo..=hi)
        .filter(|n| {
            let x = w * *n as f64 + k;
            a <= x && x < b
        })
        .count()
}

/// Sup/inf point counts over half-open windows `Q_h(x)` whose centres run
/// over a grid of step `h / 10` inside the populated region.
/// The Landau-Nyquist rate `p / W^d = |E| / (2 pi)^d` is read off the lattice.
pub fn beurling_density(lattice: &Lattice, h: f64) -> Result<DensityReport, VerifyError> {
    if !(h > 0.0) {
        return Err(VerifyError::InvalidWindow(h));
    }
    let d = lattice.dim();
    let w = lattice.w_scale();
    let r = lattice.radius() as i64;
    let shifts = lattice.shifts();
    // region where every coset is populated
    let mut lo = vec![f64::NEG_INFINITY; d];
    let mut hi = vec![f64::INFINITY; d];
    for k in shifts {
        for t in 0..d {
            lo[t] = lo[t].max(k[t] - w * r as f64);
            hi[t] = hi[t].min(k[t] + w * r as f64);
        }
    }
    let extent = (0..d).map(|t| hi[t] - lo[t]).fold(f64::INFINITY, f64::min);
    if lattice.is_empty() || !(extent >= h) {
        return Err(VerifyError::WindowTooLarge {
            h,
            extent: extent.max(0.0),
        });
    }
    let step = h / 10.0;
    let positions: Vec<Vec<f64>> = (0..d)
        .map(|t| {
            let first = lo[t] + h / 2.0;
            let count = ((hi[t] - lo[t] - h) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| first + step * i as f64).collect()
        })
        .collect();
    let total: usize = positions.iter().map(Vec::len).product();
    let (mut n_plus, mut n_minus) = (0usize, usize::MAX);
    for idx in 0..total {
        let mut rem = idx;
        let mut centre = vec![0.0; d];
        for t in (0..d).rev() {
            centre[t] = positions[t][rem % positions[t].len()];
            rem /= positions[t].len();
        }
        let count: usize = shifts
            .iter()
            .map(|k| {
                (0..d)
                    .map(|t| count_axis(w, k[t], r, centre[t] - h / 2.0, centre[t] + h / 2.0))
                    .product::<usize>()
            })
            .sum();
        n_plus = n_plus.max(count);
        n_minus = n_minus.min(count);
    }
    let vol = h.powi(d as i32);
    let nyquist = shifts.len() as f64 / w.powi(d as i32);
    Ok(DensityReport {
        h,
        n_plus,
        n_minus,
        upper: n_plus as f64 / vol,
        lower: n_minus as f64 / vol,
        nyquist,
    })
}

/// Inner and outer equal-side cube covers of a disjoint box union.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    pub beta: f64,
    pub refinements: u32,
    pub inner: CubeUnion,
    pub outer: CubeUnion,
    pub measure_inner: f64,
    pub measure_union: f64,
    pub measure_outer: f64,
}

/// Dyadically refines a grid anchored at the first box's lower corner,
/// starting from the shortest box side, until both the inner cover (cubes
/// inside the union) and the outer cover (cubes meeting it) are within
/// `eps` of the union's measure.
pub fn approximate_cover(boxes: &[Rect], eps: f64) -> Result<Cover, CoverError> {
    if boxes.is_empty() {
        return Err(CoverError::NoBoxes);
    }
    if !(eps > 0.0) {
        return Err(CoverError::InvalidTolerance(eps));
    }
    let d = boxes[0].dim();
    if let Some((index, b)) = boxes.iter().enumerate().find(|(_, b)| b.dim() != d) {
        return Err(GeometryError::Dimension {
            index,
            expected: d,
            found: b.dim(),
        }
        .into());
    }
    for first in 0..boxes.len() {
        for second in first + 1..boxes.len() {
            if boxes[first].overlap_measure(&boxes[second]) > 0.0 {
                return Err(CoverError::Overlap { first, second });
            }
        }
    }
    let measure_union: f64 = boxes.iter().map(Rect::measure).sum();
    let base = boxes
        .iter()
        .flat_map(|b| b.lo.iter().zip(&b.hi).map(|(l, h)| h - l))
        .fold(f64::INFINITY, f64::min);
    let origin = boxes[0].lo.clone();
    let floor = MIN_COVER_RATIO * base;
    let bb_lo: Vec<f64> = (0..d)
        .map(|t| boxes.iter().map(|b| b.lo[t]).fold(f64::INFINITY, f64::min))
        .collect();
    let bb_hi: Vec<f64> = (0..d)
        .map(|t| boxes.iter().map(|b| b.hi[t]).fold(f64::NEG_INFINITY, f64::max))
        .collect();

    let mut refinements = 0u32;
    loop {
        let beta = base / 2f64.powi(refinements as i32);
        if beta < floor {
            return Err(CoverError::EmptyInner { floor });
        }
        let first: Vec<i64> = (0..d)
            .map(|t| ((bb_lo[t] - origin[t]) / beta).floor() as i64)
            .collect();
        let last: Vec<i64> = (0..d)
            .map(|t| ((bb_hi[t] - origin[t]) / beta).ceil() as i64)
            .collect();
        let counts: Vec<usize> = (0..d).map(|t| (last[t] - first[t]).max(0) as usize).collect();
        let total = counts
            .iter()
            .try_fold(1usize, |acc, c| acc.checked_mul(*c))
            .filter(|n| *n <= MAX_COVER_CELLS)
            .ok_or(CoverError::TooFine { beta })?;
        let full = beta.powi(d as i32);
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        for idx in 0..total {
            let mut rem = idx;
            let mut corner = vec![0.0; d];
            for t in (0..d).rev() {
                let i = first[t] + (rem % counts[t]) as i64;
                corner[t] = origin[t] + beta * i as f64;
                rem /= counts[t];
            }
            let cell = Rect::cube(&corner, beta);
            let covered: f64 = boxes.iter().map(|b| b.overlap_measure(&cell)).sum();
            if covered >= full * (1.0 - 1e-9) {
                inner.push(corner.clone());
            }
            if covered > full * 1e-12 {
                outer.push(corner);
            }
        }
        let measure_inner = inner.len() as f64 * full;
        let measure_outer = outer.len() as f64 * full;
        if !inner.is_empty()
            && measure_outer - measure_union < eps
            && measure_union - measure_inner < eps
        {
            return Ok(Cover {
                beta,
                refinements,
                inner: CubeUnion::new(d, beta, inner)?,
                outer: CubeUnion::new(d, beta, outer)?,
                measure_inner,
                measure_union,
                measure_outer,
            });
        }
        refinements += 1;
    }
}

/// Thresholds applied by [`verify_basis`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub system_residual: f64,
    pub interpolation: f64,
    pub poisson: f64,
    /// Smallest allowed `lambda_min(N') / lambda_min(N)` for consecutive radii.
    pub frame_ratio: f64,
    /// Allowed relative gap between the densities and the Nyquist rate.
    pub density: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            system_residual: 1e-10,
            interpolation: 1e-8,
            poisson: 1e-9,
            frame_ratio: 0.9,
            density: 0.05,
        }
    }
}

/// Window side of the density check in units of `2 pi / beta`.
pub const DENSITY_WINDOWS: f64 = 50.0;
const DENSITY_RADIUS: usize = 30;

/// Full verification of a kernel set. Field names are stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub cubes: usize,
    pub dim: usize,
    pub certificate: f64,
    pub recorded_certificate: f64,
    pub max_system_residual: f64,
    pub interpolation_radius: usize,
    pub interpolation_deviation: f64,
    pub poisson_trials: usize,
    pub poisson_residual: f64,
    pub gram: Vec<GramReport>,
    pub density: Option<DensityReport>,
    pub tolerances: Tolerances,
    pub failed: Vec<String>,
    pub passed: bool,
}

/// Runs every check; Gram sections at each radius in `radii` (sorted
/// ascending), biorthogonality on `|n|_inf <= max(radii)`.
pub fn verify_basis(
    kernels: &KernelSet,
    radii: &[usize],
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<VerifyReport, VerifyError> {
    let union = kernels.union();
    let mut radii = radii.to_vec();
    radii.sort_unstable();
    radii.dedup();
    let too_big = radii
        .iter()
        .map(|n| kernels.cubes() * (2 * n + 1).pow(kernels.dim() as u32))
        .find(|size| *size > MAX_GRAM);
    if let Some(size) = too_big {
        return Err(VerifyError::SectionTooLarge(size));
    }
    let mut failed = Vec::new();
    let mut fail = |name: &str, bad: bool| {
        if bad {
            failed.push(name.to_string());
        }
    };

    let certificate = min_normalized_det(kernels.partition(), &kernels.shifts().shifts);
    fail("certificate", !(certificate > 0.0));
    let max_system_residual = system_residual(kernels.partition(), kernels.shifts(), kernels.coefficients());
    fail("system_residual", !(max_system_residual <= tol.system_residual));
    let interpolation_radius = radii.last().copied().unwrap_or(0);
    let interpolation_deviation = check_interpolation(kernels, interpolation_radius);
    fail("interpolation", !(interpolation_deviation <= tol.interpolation));
    let poisson_residual = check_poisson_residual(kernels, trials, seed);
    fail("poisson", !(poisson_residual <= tol.poisson));

    let mut gram = Vec::new();
    let mut stalled = false;
    for n in &radii {
        match frame_bounds(union, kernels.shifts(), *n) {
            Ok(r) => gram.push(r),
            Err(VerifyError::Convergence { .. }) => stalled = true,
            Err(e) => return Err(e),
        }
    }
    let degraded = gram.windows(2).any(|w| w[1].lambda_min < tol.frame_ratio * w[0].lambda_min);
    fail(
        "frame_bounds",
        stalled || degraded || gram.iter().any(|r| !(r.lambda_min > 0.0)),
    );

    let lattice = Lattice::new(kernels.shifts(), kernels.beta(), DENSITY_RADIUS);
    let density = beurling_density(&lattice, DENSITY_WINDOWS * kernels.w_scale()).ok();
    let density_ok = density.as_ref().is_some_and(|r| {
        let rate = union.nyquist_rate();
        (r.upper - rate).abs() <= tol.density * rate && (r.lower - rate).abs() <= tol.density * rate
    });
    fail("density", !density_ok);

    let passed = failed.is_empty();
    Ok(VerifyReport {
        cubes: kernels.cubes(),
        dim: kernels.dim(),
        certificate,
        recorded_certificate: kernels.shifts().min_norm_det,
        max_system_residual,
        interpolation_radius,
        interpolation_deviation,
        poisson_trials: trials,
        poisson_residual,
        gram,
        density,
        tolerances: tol.clone(),
        failed,
        passed,
    })
}
