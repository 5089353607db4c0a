//! Interpolation kernels.
//!
//! The spectral function `s_l` is constant on each cell `Q_j^s` with value
//! `x_l(j, s)`, the solution of the cell's exponential system with right-hand
//! side `(sqrt(2 pi) / beta)^d` on the `m = 0` row. The spatial kernel
//! `S_l` is its inverse Fourier transform, a finite sum of closed-form box
//! transforms. Fourier convention: `F f(x) = (2 pi)^{-d/2} int f(t) e^{-i x.t} dt`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{CubeUnion, GeometryError, Partition, Rect};
use crate::linalg::CMatrix;
use crate::shifts::{self, ShiftError, ShiftVector, MAX_CUBES};

/// Below this frequency the box transform switches to its Taylor expansion.
const SINC_SWITCH: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("system of cell (j={j}, s={s}) is singular")]
    SingularSystem { j: usize, s: usize },
    #[error("{0} cubes exceed the supported maximum of {MAX_CUBES}")]
    TooManyCubes(usize),
    #[error("component shapes disagree: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Shift(#[from] ShiftError),
}

/// `int_lo^hi e^{i w t} dw`, analytic at `t = 0`.
pub(crate) fn interval_transform(lo: f64, hi: f64, t: f64) -> Complex64 {
    let width = hi - lo;
    let mag = if t.abs() < SINC_SWITCH {
        let u2 = (width * t) * (width * t);
        width * (1.0 - u2 / 24.0 + u2 * u2 / 1920.0)
    } else {
        2.0 * (0.5 * width * t).sin() / t
    };
    Complex64::from_polar(1.0, 0.5 * (lo + hi) * t) * mag
}

/// Inverse Fourier transform of the indicator of `rect`, evaluated at `t`.
pub fn rect_kernel(rect: &Rect, t: &[f64]) -> Complex64 {
    let norm = (2.0 * PI).powf(-(rect.dim() as f64) / 2.0);
    rect.lo
        .iter()
        .zip(&rect.hi)
        .zip(t)
        .map(|((lo, hi), x)| interval_transform(*lo, *hi, *x))
        .product::<Complex64>()
        * norm
}

/// Coefficients `x_l(j, s)` stored at `(j * S + s) * p + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    cubes: usize,
    cells: usize,
    x: Vec<Complex64>,
    /// Largest system residual relative to `(sqrt(2 pi) / beta)^d`.
    pub max_residual: f64,
}

impl CoefficientTable {
    pub fn from_values(cubes: usize, cells: usize, x: Vec<Complex64>, max_residual: f64) -> Result<Self, KernelError> {
        if x.len() != cubes * cubes * cells {
            return Err(KernelError::Mismatch(format!(
                "coefficient table has {} entries, expected {}",
                x.len(),
                cubes * cubes * cells
            )));
        }
        Ok(Self {
            cubes,
            cells,
            x,
            max_residual,
        })
    }

    pub fn cubes(&self) -> usize {
        self.cubes
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn get(&self, l: usize, j: usize, s: usize) -> Complex64 {
        self.x[(j * self.cells + s) * self.cubes + l]
    }

    /// All `x_l(j, s)` for one cell, indexed by `l`.
    pub fn cell(&self, j: usize, s: usize) -> &[Complex64] {
        let start = (j * self.cells + s) * self.cubes;
        &self.x[start..start + self.cubes]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.x
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.x
    }
}

/// Solves every cell system by LU with partial pivoting.
pub fn solve_coefficients(partition: &Partition, shifts: &ShiftVector) -> Result<CoefficientTable, KernelError> {
    let p = partition.cubes();
    if p > MAX_CUBES {
        return Err(KernelError::TooManyCubes(p));
    }
    let cells = partition.cell_count();
    let scale = ((2.0 * PI).sqrt() / partition.beta()).powi(partition.dim() as i32);
    let mut x = Vec::with_capacity(p * p * cells);
    let mut max_residual = 0.0f64;
    for j in 0..p {
        for s in 0..cells {
            let matrix = shifts::system_matrix(partition, &shifts.shifts, j, s);
            let mut rhs = vec![Complex64::new(0.0, 0.0); p];
            rhs[j] = Complex64::new(scale, 0.0);
            let sol = matrix
                .lu()
                .solve(&rhs)
                .map_err(|_| KernelError::SingularSystem { j, s })?;
            max_residual = max_residual.max(cell_residual(&matrix, &sol, j, scale));
            x.extend(sol);
        }
    }
    CoefficientTable::from_values(p, cells, x, max_residual)
}

fn cell_residual(matrix: &CMatrix, sol: &[Complex64], j: usize, scale: f64) -> f64 {
    matrix
        .mul_vec(sol)
        .iter()
        .enumerate()
        .map(|(k, v)| (v - if k == j { scale } else { 0.0 }).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Max system residual of an existing table, relative to `(sqrt(2 pi) / beta)^d`.
pub fn system_residual(partition: &Partition, shifts: &ShiftVector, table: &CoefficientTable) -> f64 {
    let scale = ((2.0 * PI).sqrt() / partition.beta()).powi(partition.dim() as i32);
    let mut worst = 0.0f64;
    for j in 0..partition.cubes() {
        for s in 0..partition.cell_count() {
            let matrix = shifts::system_matrix(partition, &shifts.shifts, j, s);
            let r = cell_residual(&matrix, table.cell(j, s), j, scale);
            // f64::max would swallow a NaN
            if r.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(r);
        }
    }
    worst
}

/// Everything needed to evaluate `s_l` and `S_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSet {
    union: CubeUnion,
    partition: Partition,
    shifts: ShiftVector,
    coeffs: CoefficientTable,
}

impl KernelSet {
    /// Partition, shift search and coefficient solve in one go.
    pub fn build(union: CubeUnion, seed: u64, tau: f64, max_tries: usize) -> Result<Self, KernelError> {
        let partition = Partition::build(&union)?;
        if partition.cubes() > MAX_CUBES {
            return Err(KernelError::TooManyCubes(partition.cubes()));
        }
        let shifts = shifts::choose_shifts(&partition, seed, tau, max_tries)?;
        let coeffs = solve_coefficients(&partition, &shifts)?;
        Ok(Self {
            union,
            partition,
            shifts,
            coeffs,
        })
    }

    /// Builds with explicitly given shifts.
    pub fn with_shifts(union: CubeUnion, shifts: Vec<Vec<f64>>) -> Result<Self, KernelError> {
        let partition = Partition::build(&union)?;
        let shifts = ShiftVector::from_shifts(&partition, shifts)?;
        let coeffs = solve_coefficients(&partition, &shifts)?;
        Ok(Self {
            union,
            partition,
            shifts,
            coeffs,
        })
    }

    pub fn from_parts(
        union: CubeUnion,
        partition: Partition,
        shifts: ShiftVector,
        coeffs: CoefficientTable,
    ) -> Result<Self, KernelError> {
        let p = union.len();
        if partition.cubes() != p || shifts.len() != p || coeffs.cubes() != p {
            return Err(KernelError::Mismatch("cube counts differ".into()));
        }
        if coeffs.cells() != partition.cell_count() {
            return Err(KernelError::Mismatch(format!(
                "table has {} cells, partition has {}",
                coeffs.cells(),
                partition.cell_count()
            )));
        }
        if shifts.shifts.iter().any(|k| k.len() != union.dim()) {
            return Err(KernelError::Mismatch("shift dimension".into()));
        }
        Ok(Self {
            union,
            partition,
            shifts,
            coeffs,
        })
    }

    pub fn union(&self) -> &CubeUnion {
        &self.union
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn shifts(&self) -> &ShiftVector {
        &self.shifts
    }

    pub fn coefficients(&self) -> &CoefficientTable {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut CoefficientTable {
        &mut self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.union.dim()
    }

    pub fn cubes(&self) -> usize {
        self.union.len()
    }

    pub fn beta(&self) -> f64 {
        self.union.beta()
    }

    /// Lattice step `2 pi / beta`.
    pub fn w_scale(&self) -> f64 {
        2.0 * PI / self.union.beta()
    }

    /// `s_l(omega)`; zero off the union.
    pub fn eval_spectral(&self, l: usize, omega: &[f64]) -> Complex64 {
        match self.partition.cell_of(&self.union, omega) {
            Some((j, s)) => self.coeffs.get(l, j, s),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `S_l(t)`.
    pub fn eval_kernel(&self, l: usize, t: &[f64]) -> Complex64 {
        self.eval_with(t, |cell| cell[l])
    }

    /// `S_l(t)` for every `l` at once.
    pub fn eval_kernels(&self, t: &[f64]) -> Vec<Complex64> {
        (0..self.cubes())
            .map(|l| self.eval_kernel(l, t))
            .collect()
    }

    /// Sums `weight(x(j, s)) * rect_kernel(Q_j^s, t)` using the product grid:
    /// the 1-D transforms of each translated interval are computed once.
    fn eval_with(&self, t: &[f64], weight: impl Fn(&[Complex64]) -> Complex64) -> Complex64 {
        let d = self.dim();
        let beta = self.beta();
        let counts = self.partition.axis_counts();
        let norm = (2.0 * PI).powf(-(d as f64) / 2.0);
        let mut total = Complex64::new(0.0, 0.0);
        let mut factors: Vec<Vec<Complex64>> = vec![Vec::new(); d];
        for j in 0..self.cubes() {
            for (axis, f) in factors.iter_mut().enumerate() {
                let cuts = self.partition.cuts(axis);
                f.clear();
                f.extend((0..counts[axis]).map(|i| {
                    let shift = beta * self.partition.axis_offset(j, axis, i) as f64;
                    interval_transform(cuts[i] + shift, cuts[i + 1] + shift, t[axis])
                }));
            }
            for s in 0..self.partition.cell_count() {
                let mut rem = s;
                let mut prod = Complex64::new(1.0, 0.0);
                for axis in (0..d).rev() {
                    prod *= factors[axis][rem % counts[axis]];
                    rem /= counts[axis];
                }
                total += weight(self.coeffs.cell(j, s)) * prod;
            }
        }
        total * norm
    }
}
