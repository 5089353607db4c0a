//! Shift vectors `k_0, ..., k_{p-1}` and the per-cell exponential systems.
//!
//! For cell `(j, s)` the system matrix has entry `(k, l) = exp(i beta m_k . k_l)`
//! where `m_k` runs over the translation set `C_js`. Its rows are unimodular,
//! so `|det| <= p^{p/2}`; the certificate of a shift choice is the smallest
//! normalized determinant over all cells.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Partition;
use crate::linalg::CMatrix;

/// Largest number of cubes the dense solver accepts.
pub const MAX_CUBES: usize = 32;

pub const DEFAULT_TAU: f64 = 1e-3;
pub const DEFAULT_MAX_TRIES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShiftError {
    #[error("no admissible shifts after {tries} draws (best certificate {best:e})")]
    SearchExhausted { tries: usize, best: f64 },
    #[error("threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("max_tries must be at least 1")]
    NoTries,
    #[error("{0} cubes exceed the supported maximum of {MAX_CUBES}")]
    TooManyCubes(usize),
    #[error("expected {expected} shift vectors of length {dim}, got {found}")]
    Shape {
        expected: usize,
        dim: usize,
        found: usize,
    },
}

/// Accepted shifts with their determinant certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftVector {
    pub shifts: Vec<Vec<f64>>,
    pub min_norm_det: f64,
    pub seed: u64,
    pub tau: f64,
    pub tries: usize,
}

impl ShiftVector {
    /// Wraps explicit shifts, computing their certificate. Shifts are taken
    /// as given (no reduction), which lets tests forge degenerate choices.
    pub fn from_shifts(partition: &Partition, shifts: Vec<Vec<f64>>) -> Result<Self, ShiftError> {
        if shifts.len() != partition.cubes() || shifts.iter().any(|k| k.len() != partition.dim()) {
            return Err(ShiftError::Shape {
                expected: partition.cubes(),
                dim: partition.dim(),
                found: shifts.len(),
            });
        }
        let min_norm_det = min_normalized_det(partition, &shifts);
        Ok(Self {
            shifts,
            min_norm_det,
            seed: 0,
            tau: 0.0,
            tries: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn get(&self, l: usize) -> &[f64] {
        &self.shifts[l]
    }
}

/// Exponential system of cell `(j, s)`: entry `(k, l) = exp(i beta m_k . k_l)`
/// with `m_k = n_jk + C_js(k)`. Row `j` corresponds to `m = 0`.
pub fn system_matrix(partition: &Partition, shifts: &[Vec<f64>], j: usize, s: usize) -> CMatrix {
    let beta = partition.beta();
    let rows = partition.translation_set(j, s);
    CMatrix::from_fn(partition.cubes(), |k, l| {
        let phase: f64 = rows[k]
            .iter()
            .zip(&shifts[l])
            .map(|(m, x)| *m as f64 * x)
            .sum();
        Complex64::from_polar(1.0, beta * phase)
    })
}

/// `min_{j,s} |det B_js| / p^{p/2}`.
pub fn min_normalized_det(partition: &Partition, shifts: &[Vec<f64>]) -> f64 {
    let p = partition.cubes();
    let hadamard = (p as f64).powf(p as f64 / 2.0);
    let cells = partition.cell_count();
    (0..p * cells)
        .into_par_iter()
        .map(|idx| {
            let (j, s) = (idx / cells, idx % cells);
            system_matrix(partition, shifts, j, s).lu().det().norm() / hadamard
        })
        .reduce(|| f64::INFINITY, f64::min)
        .min(1.0)
}

/// Seeded rejection sampling: draw every `k_l` uniformly from
/// `[0, 2 pi / beta)^d` until the certificate reaches `tau`.
pub fn choose_shifts(
    partition: &Partition,
    seed: u64,
    tau: f64,
    max_tries: usize,
) -> Result<ShiftVector, ShiftError> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(ShiftError::InvalidThreshold(tau));
    }
    if max_tries == 0 {
        return Err(ShiftError::NoTries);
    }
    let p = partition.cubes();
    if p > MAX_CUBES {
        return Err(ShiftError::TooManyCubes(p));
    }
    let period = 2.0 * PI / partition.beta();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for attempt in 1..=max_tries {
        let shifts: Vec<Vec<f64>> = (0..p)
            .map(|_| {
                (0..partition.dim())
                    .map(|_| (rng.random::<f64>() * period).rem_euclid(period))
                    .collect()
            })
            .collect();
        let cert = min_normalized_det(partition, &shifts);
        best = best.max(cert);
        if cert >= tau {
            return Ok(ShiftVector {
                shifts,
                min_norm_det: cert,
                seed,
                tau,
                tries: attempt,
            });
        }
    }
    Err(ShiftError::SearchExhausted {
        tries: max_tries,
        best,
    })
}
