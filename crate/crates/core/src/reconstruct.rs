//! Sampling lattice, truncated reconstruction series and test signals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::CubeUnion;
use crate::kernels::KernelSet;
use crate::quadrature::gauss_legendre;
use crate::shifts::ShiftVector;

/// Nodes per axis of the bump oracle's quadrature.
pub const BUMP_NODES: usize = 64;
/// Side of the bump support relative to its cube.
pub const BUMP_SHRINK: f64 = 0.9;
/// Largest phase span integrated by one bump quadrature panel.
pub const BUMP_PANEL_PHASE: f64 = 60.0;

#[derive(Debug, Error)]
pub enum SampleError<E: std::error::Error + 'static> {
    #[error("signal failed at {point:?}")]
    Oracle {
        point: Vec<f64>,
        #[source]
        source: E,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("sample table has {found} values, lattice has {expected} points")]
pub struct ShapeError {
    pub expected: usize,
    pub found: usize,
}

/// Truncated lattice `{W n + k_l : |n|_inf <= N}`, `W = (2 pi / beta) Id`.
///
/// Points are ordered l-major, then lexicographically in `n` with `n_0`
/// varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    dim: usize,
    w_scale: f64,
    shifts: Vec<Vec<f64>>,
    radius: usize,
}

impl Lattice {
    pub fn new(shifts: &ShiftVector, beta: f64, radius: usize) -> Self {
        Self::from_raw(shifts.shifts.clone(), beta, radius)
    }

    pub fn from_raw(shifts: Vec<Vec<f64>>, beta: f64, radius: usize) -> Self {
        let dim = shifts.first().map_or(0, Vec::len);
        Self {
            dim,
            w_scale: 2.0 * PI / beta,
            shifts,
            radius,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn w_scale(&self) -> f64 {
        self.w_scale
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn shifts(&self) -> &[Vec<f64>] {
        &self.shifts
    }

    /// `(2N + 1)^d`.
    pub fn block_len(&self) -> usize {
        (2 * self.radius + 1).pow(self.dim as u32)
    }

    /// `p (2N + 1)^d`.
    pub fn len(&self) -> usize {
        self.shifts.len() * self.block_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(l, n)` of the point at position `idx`.
    pub fn index_of(&self, idx: usize) -> (usize, Vec<i64>) {
        let block = self.block_len();
        let side = 2 * self.radius + 1;
        let (l, mut rem) = (idx / block, idx % block);
        let mut n = vec![0i64; self.dim];
        for t in (0..self.dim).rev() {
            n[t] = (rem % side) as i64 - self.radius as i64;
            rem /= side;
        }
        (l, n)
    }

    /// Position of `(l, n)`, if inside the truncation.
    pub fn position(&self, l: usize, n: &[i64]) -> Option<usize> {
        let r = self.radius as i64;
        if l >= self.shifts.len() || n.len() != self.dim || n.iter().any(|v| v.abs() > r) {
            return None;
        }
        let side = 2 * self.radius + 1;
        let within = n.iter().fold(0usize, |acc, v| acc * side + (v + r) as usize);
        Some(l * self.block_len() + within)
    }

    pub fn point(&self, l: usize, n: &[i64]) -> Vec<f64> {
        n.iter()
            .zip(&self.shifts[l])
            .map(|(m, k)| self.w_scale * *m as f64 + k)
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|idx| {
                let (l, n) = self.index_of(idx);
                self.point(l, &n)
            })
            .collect()
    }

    /// Separation of the full (untruncated) lattice: `W` within a coset,
    /// and the distance from `k_l - k_s` to `W Z^d` across cosets.
    pub fn separation(&self) -> f64 {
        let w = self.w_scale;
        let mut best = w;
        for l in 0..self.shifts.len() {
            for s in l + 1..self.shifts.len() {
                let dist2: f64 = self.shifts[l]
                    .iter()
                    .zip(&self.shifts[s])
                    .map(|(a, b)| {
                        let diff = a - b;
                        let r = diff - w * (diff / w).round();
                        r * r
                    })
                    .sum();
                best = best.min(dist2.sqrt());
            }
        }
        best
    }
}

/// Enumerate the truncated lattice for a shift choice.
pub fn lattice_points(shifts: &ShiftVector, beta: f64, radius: usize) -> (Lattice, Vec<Vec<f64>>) {
    let lattice = Lattice::new(shifts, beta, radius);
    let points = lattice.points();
    (lattice, points)
}

/// Values `alpha_n^l` on a lattice, in lattice order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    lattice: Lattice,
    values: Vec<Complex64>,
}

impl SampleSet {
    pub fn new(lattice: Lattice, values: Vec<Complex64>) -> Result<Self, ShapeError> {
        if values.len() != lattice.len() {
            return Err(ShapeError {
                expected: lattice.len(),
                found: values.len(),
            });
        }
        Ok(Self { lattice, values })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); lattice.len()];
        Self { lattice, values }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn get(&self, l: usize, n: &[i64]) -> Option<Complex64> {
        self.lattice.position(l, n).map(|i| self.values[i])
    }

    pub fn set(&mut self, l: usize, n: &[i64], value: Complex64) -> bool {
        match self.lattice.position(l, n) {
            Some(i) => {
                self.values[i] = value;
                true
            }
            None => false,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `alpha_n^l = oracle(W n + k_l)`.
pub fn sample<F, E>(lattice: &Lattice, mut oracle: F) -> Result<SampleSet, SampleError<E>>
where
    F: FnMut(&[f64]) -> Result<Complex64, E>,
    E: std::error::Error + 'static,
{
    let values = lattice
        .points()
        .into_iter()
        .map(|pt| oracle(&pt).map_err(|source| SampleError::Oracle { point: pt, source }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SampleSet {
        lattice: lattice.clone(),
        values,
    })
}

/// Infallible variant of [`sample`], evaluated in parallel.
pub fn sample_with<F>(lattice: &Lattice, oracle: F) -> SampleSet
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let values = lattice.points().par_iter().map(|pt| oracle(pt)).collect();
    SampleSet {
        lattice: lattice.clone(),
        values,
    }
}

/// `sum_{l, |n| <= N} alpha_n^l S_l(t - W n - k_l)`, terms added pairwise in
/// lattice order.
pub fn reconstruct_at(kernels: &KernelSet, samples: &SampleSet, t: &[f64]) -> Complex64 {
    let lattice = samples.lattice();
    let mut shifted = vec![0.0; t.len()];
    let terms: Vec<Complex64> = samples
        .values()
        .iter()
        .enumerate()
        .map(|(idx, &alpha)| {
            if alpha == Complex64::new(0.0, 0.0) {
                return alpha;
            }
            let (l, n) = lattice.index_of(idx);
            for (axis, x) in shifted.iter_mut().enumerate() {
                *x = t[axis] - lattice.w_scale() * n[axis] as f64 - lattice.shifts()[l][axis];
            }
            alpha * kernels.eval_kernel(l, &shifted)
        })
        .collect();
    pairwise_sum(&terms)
}

/// [`reconstruct_at`] over many points; each point's sum is order-fixed, so
/// results do not depend on the thread count.
pub fn reconstruct_many(kernels: &KernelSet, samples: &SampleSet, points: &[Vec<f64>]) -> Vec<Complex64> {
    points
        .par_iter()
        .map(|t| reconstruct_at(kernels, samples, t))
        .collect()
}

pub(crate) fn pairwise_sum(terms: &[Complex64]) -> Complex64 {
    if terms.len() <= 8 {
        return terms.iter().sum();
    }
    let mid = terms.len() / 2;
    pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
}

/// `F[alpha](t) = sum alpha_n^l S_l(t - W n - k_l)` for finitely supported `alpha`.
#[derive(Debug, Clone)]
pub struct Synthesized<'a> {
    kernels: &'a KernelSet,
    coeffs: SampleSet,
}

impl Synthesized<'_> {
    pub fn coefficients(&self) -> &SampleSet {
        &self.coeffs
    }

    /// Straight left-to-right evaluation of the defining sum.
    pub fn eval(&self, t: &[f64]) -> Complex64 {
        let lattice = self.coeffs.lattice();
        let w = lattice.w_scale();
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, alpha) in self.coeffs.values().iter().enumerate() {
            if alpha.norm_sqr() == 0.0 {
                continue;
            }
            let (l, n) = lattice.index_of(idx);
            let arg: Vec<f64> = (0..t.len())
                .map(|axis| t[axis] - (w * n[axis] as f64 + lattice.shifts()[l][axis]))
                .collect();
            acc += alpha * self.kernels.eval_kernel(l, &arg);
        }
        acc
    }
}

pub fn synth_from_coeffs(kernels: &KernelSet, coeffs: SampleSet) -> Synthesized<'_> {
    Synthesized { kernels, coeffs }
}

/// Band-limited test signal whose spectrum is the standard bump
/// `prod_t exp(-1 / (1 - u_t^2))` on a concentric sub-cube of `Q_j`.
///
/// The transform is evaluated with `BUMP_NODES`-point Gauss-Legendre panels;
/// a single panel resolves phase spans up to about 180 rad, so the support
/// is split into more panels once `|t| * side` exceeds `BUMP_PANEL_PHASE`.
#[derive(Debug, Clone)]
pub struct BumpOracle {
    centers: Vec<f64>,
    half: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    norm: f64,
}

impl BumpOracle {
    pub fn new(union: &CubeUnion, j: usize) -> Self {
        let beta = union.beta();
        let (nodes, weights) = gauss_legendre(BUMP_NODES);
        Self {
            centers: union.corner(j).iter().map(|a| a + 0.5 * beta).collect(),
            half: 0.5 * BUMP_SHRINK * beta,
            nodes,
            weights,
            norm: (2.0 * PI).powf(-(union.dim() as f64) / 2.0),
        }
    }

    /// Spectral density at `omega`.
    pub fn spectrum(&self, omega: &[f64]) -> f64 {
        omega
            .iter()
            .zip(&self.centers)
            .map(|(w, c)| {
                let u = (w - c) / self.half;
                if u.abs() < 1.0 {
                    (-1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            })
            .product()
    }

    fn axis_transform(&self, center: f64, t: f64) -> Complex64 {
        let span = 2.0 * self.half;
        let panels = ((span * t.abs() / BUMP_PANEL_PHASE).ceil() as usize).max(1);
        let width = span / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for panel in 0..panels {
            let mid = center - self.half + width * (panel as f64 + 0.5);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                let omega = mid + 0.5 * width * x;
                let u = (omega - center) / self.half;
                let f = (-1.0 / (1.0 - u * u)).exp();
                acc += Complex64::from_polar(0.5 * width * w * f, omega * t);
            }
        }
        acc
    }

    /// `(2 pi)^{-d/2} int f(w) e^{i w.t} dw`; the bump is separable so the
    /// tensor rule factors into per-axis sums.
    pub fn eval(&self, t: &[f64]) -> Complex64 {
        self.centers
            .iter()
            .zip(t)
            .map(|(c, x)| self.axis_transform(*c, *x))
            .product::<Complex64>()
            * self.norm
    }

    /// Spectral mass `(2 pi)^{-d/2} int f`, equal to `F(0)` and to `max |F|`.
    pub fn peak(&self) -> f64 {
        self.eval(&vec![0.0; self.centers.len()]).re
    }
}

pub fn bump_oracle(union: &CubeUnion, j: usize) -> BumpOracle {
    BumpOracle::new(union, j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shifts(k: Vec<Vec<f64>>) -> ShiftVector {
        ShiftVector {
            shifts: k,
            min_norm_det: 1.0,
            seed: 0,
            tau: 0.0,
            tries: 0,
        }
    }

    #[test]
    fn lattice_enumeration() {
        let (l, pts) = lattice_points(&shifts(vec![vec![0.0]]), 2.0 * PI, 1);
        assert_eq!(pts, vec![vec![-1.0], vec![0.0], vec![1.0]]);
        assert_eq!(l.len(), 3);

        let (_, pts) = lattice_points(&shifts(vec![vec![0.0], vec![PI / 2.0]]), 1.0, 0);
        assert_eq!(pts, vec![vec![0.0], vec![PI / 2.0]]);

        let (l, pts) = lattice_points(&shifts(vec![vec![0.1, 0.2], vec![0.3, 0.4]]), 1.0, 2);
        assert_eq!(pts.len(), 50);
        assert_eq!(l.len(), 50);
        for idx in 0..l.len() {
            let (li, n) = l.index_of(idx);
            assert_eq!(l.position(li, &n), Some(idx));
        }
        assert_eq!(l.index_of(0), (0, vec![-2, -2]));
        assert_eq!(l.index_of(1), (0, vec![-2, -1]));
        assert_eq!(l.position(0, &[3, 0]), None);
    }

    #[test]
    fn separation() {
        let l = Lattice::from_raw(vec![vec![0.0], vec![PI / 2.0]], 1.0, 3);
        assert!((l.separation() - PI / 2.0).abs() < 1e-15);
        let l = Lattice::from_raw(vec![vec![0.1], vec![2.0 * PI - 0.1]], 1.0, 3);
        assert!((l.separation() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn zero_samples() {
        let l = Lattice::from_raw(vec![vec![0.0], vec![1.0]], 1.0, 2);
        let s = sample(&l, |_| Ok::<_, std::io::Error>(Complex64::new(0.0, 0.0))).unwrap();
        assert!(s.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn oracle_failure_reports_point() {
        let l = Lattice::from_raw(vec![vec![0.5]], 2.0 * PI, 1);
        let err = sample(&l, |t| {
            if t[0] > 1.0 {
                Err(std::io::Error::other("boom"))
            } else {
                Ok(Complex64::new(1.0, 0.0))
            }
        })
        .unwrap_err();
        let SampleError::Oracle { point, .. } = err;
        assert_eq!(point, vec![1.5]);
    }

    #[test]
    fn pairwise_sum_matches() {
        let terms: Vec<Complex64> = (0..37).map(|i| Complex64::new(i as f64, -(i as f64) / 2.0)).collect();
        assert_eq!(pairwise_sum(&terms), Complex64::new(666.0, -333.0));
    }

    #[test]
    fn bump_basics() {
        let u = CubeUnion::new(1, 1.0, vec![vec![0.0]]).unwrap();
        let f = bump_oracle(&u, 0);
        let peak = f.peak();
        assert!(peak > 0.0);
        for t in [0.3, -2.0, 17.5, 60.0] {
            let a = f.eval(&[t]);
            let b = f.eval(&[-t]).conj();
            assert!((a - b).norm() < 1e-15);
            assert!(a.norm() <= peak * (1.0 + 1e-12));
        }
    }
}
