//! Cube unions, wrap indices and the translation-consistent cell partition.
//!
//! A [`CubeUnion`] is a finite union of pairwise disjoint half-open cubes of
//! common side `beta`. Every cube `Q_k` has a unique integer translate (in
//! units of `beta`) whose lower corner lands inside `Q_j`; cutting `Q_0` at
//! all of those landing points yields a grid of cells, and every cell of
//! `Q_0` translates onto exactly one cell of each other cube. [`Partition`]
//! stores the grid once on `Q_0` together with the per-axis integer offsets
//! that carry it to every other cube.
//!
//! All indices are zero-based: cube `j`, cell `s`, axis `t`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance (in units of `beta`) used to merge coincident cut
/// coordinates and to compare translated cell faces.
pub const COORD_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("cube side must be a positive finite number, got {0}")]
    InvalidSide(f64),
    #[error("cube union needs at least one cube")]
    Empty,
    #[error("corner {index} has {found} coordinates, expected {expected}")]
    Dimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("corner {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("cubes {first} and {second} overlap")]
    Overlap { first: usize, second: usize },
    #[error("box {index} is empty or inverted on axis {axis}")]
    EmptyBox { index: usize, axis: usize },
    #[error("translated cells fail to tile cube {cube} (mismatch {gap:e})")]
    Tiling { cube: usize, gap: f64 },
}

/// Half-open box `prod_t [lo_t, hi_t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Rect {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, GeometryError> {
        if lo.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        if lo.len() != hi.len() {
            return Err(GeometryError::Dimension {
                index: 0,
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if let Some(axis) = (0..lo.len()).find(|&t| !(lo[t] < hi[t]) || !hi[t].is_finite()) {
            return Err(GeometryError::EmptyBox { index: 0, axis });
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(corner: &[f64], side: f64) -> Self {
        Self {
            lo: corner.to_vec(),
            hi: corner.iter().map(|c| c + side).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn measure(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| *l <= *x && *x < *h)
    }

    /// Translate by `scale * offset`.
    pub fn translated(&self, offset: &[i64], scale: f64) -> Self {
        Self {
            lo: self
                .lo
                .iter()
                .zip(offset)
                .map(|(l, m)| l + scale * *m as f64)
                .collect(),
            hi: self
                .hi
                .iter()
                .zip(offset)
                .map(|(h, m)| h + scale * *m as f64)
                .collect(),
        }
    }

    /// Volume of the intersection with `other`.
    pub fn overlap_measure(&self, other: &Rect) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .map(|((l1, h1), (l2, h2))| (h1.min(*h2) - l1.max(*l2)).max(0.0))
            .product()
    }
}

/// Finite union of disjoint half-open cubes `[alpha_j, alpha_j + beta)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeUnion {
    dim: usize,
    beta: f64,
    corners: Vec<Vec<f64>>,
}

impl CubeUnion {
    /// Validates the union: positive side, consistent dimension, pairwise
    /// disjoint cubes (two cubes are disjoint iff some axis separates their
    /// corners by at least `beta`, up to `COORD_TOL * beta`).
    pub fn new(dim: usize, beta: f64, corners: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(GeometryError::InvalidSide(beta));
        }
        if corners.is_empty() {
            return Err(GeometryError::Empty);
        }
        for (index, c) in corners.iter().enumerate() {
            if c.len() != dim {
                return Err(GeometryError::Dimension {
                    index,
                    expected: dim,
                    found: c.len(),
                });
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFinite { index });
            }
        }
        let min_gap = beta * (1.0 - COORD_TOL);
        for first in 0..corners.len() {
            for second in first + 1..corners.len() {
                let separated = corners[first]
                    .iter()
                    .zip(&corners[second])
                    .any(|(a, b)| (a - b).abs() >= min_gap);
                if !separated {
                    return Err(GeometryError::Overlap { first, second });
                }
            }
        }
        Ok(Self { dim, beta, corners })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn corners(&self) -> &[Vec<f64>] {
        &self.corners
    }

    pub fn corner(&self, j: usize) -> &[f64] {
        &self.corners[j]
    }

    /// Number of cubes `p`.
    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn cube(&self, j: usize) -> Rect {
        Rect::cube(&self.corners[j], self.beta)
    }

    /// `p * beta^d`.
    pub fn measure(&self) -> f64 {
        self.len() as f64 * self.beta.powi(self.dim as i32)
    }

    /// Landau-Nyquist rate `|E| / (2 pi)^d`.
    pub fn nyquist_rate(&self) -> f64 {
        self.measure() / (2.0 * std::f64::consts::PI).powi(self.dim as i32)
    }

    /// Index of the cube containing `point`, if any.
    pub fn cube_of(&self, point: &[f64]) -> Option<usize> {
        if point.len() != self.dim {
            return None;
        }
        (0..self.len()).find(|&j| {
            self.corners[j]
                .iter()
                .zip(point)
                .all(|(a, x)| *a <= *x && *x < *a + self.beta)
        })
    }

    /// Wrap index `n_jk` and anchor `gamma_jk = alpha_k - beta * n_jk`, the
    /// unique integer translate of `alpha_k` lying in `Q_j`.
    pub fn locate_wrap(&self, j: usize, k: usize) -> (Vec<i64>, Vec<f64>) {
        let (aj, ak) = (&self.corners[j], &self.corners[k]);
        let mut wrap = Vec::with_capacity(self.dim);
        let mut gamma = Vec::with_capacity(self.dim);
        for t in 0..self.dim {
            let q = (ak[t] - aj[t]) / self.beta;
            if (q - q.round()).abs() < COORD_TOL {
                // corners aligned up to rounding: the anchor is alpha_j itself
                let n = q.round() as i64;
                wrap.push(n);
                gamma.push((ak[t] - self.beta * n as f64).max(aj[t]));
                continue;
            }
            let mut n = q.floor() as i64;
            let mut g = ak[t] - self.beta * n as f64;
            // the quotient can round across an integer; fix up so g stays in [a_j, a_j + beta)
            if g < aj[t] {
                n -= 1;
                g = ak[t] - self.beta * n as f64;
            } else if g >= aj[t] + self.beta {
                n += 1;
                g = ak[t] - self.beta * n as f64;
            }
            wrap.push(n);
            gamma.push(g);
        }
        (wrap, gamma)
    }
}

/// Cells of every cube, labelled consistently across cubes.
///
/// The reference cells `Q_0^s` form a product grid on `Q_0`; cell `s` has the
/// per-axis interval indices given by [`Partition::cell_axes`] (row-major,
/// axis 0 slowest). The cell `Q_j^s` is `Q_0^s + beta * m_j(s)` where the
/// offset `m_j(s)` is assembled axis by axis from [`Partition::axis_offset`].
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    dim: usize,
    beta: f64,
    cubes: usize,
    /// Per axis, sorted breakpoints of `Q_0` including both end faces.
    cuts: Vec<Vec<f64>>,
    /// `offsets[j][t][i]`: translation (units of beta) of interval `i` of axis `t` into cube `j`.
    offsets: Vec<Vec<Vec<i64>>>,
    wrap: Vec<Vec<Vec<i64>>>,
    gamma: Vec<Vec<Vec<f64>>>,
    cells: Vec<Rect>,
}

impl Partition {
    /// Cuts `Q_0` at the deduplicated anchor coordinates `gamma_0k`, derives
    /// the per-cube offsets and checks that the translated cells tile every
    /// cube.
    pub fn build(union: &CubeUnion) -> Result<Self, GeometryError> {
        let (d, p, beta) = (union.dim(), union.len(), union.beta());
        let tol = COORD_TOL * beta;

        let mut wrap = vec![vec![Vec::new(); p]; p];
        let mut gamma = vec![vec![Vec::new(); p]; p];
        for j in 0..p {
            for k in 0..p {
                let (n, g) = union.locate_wrap(j, k);
                wrap[j][k] = n;
                gamma[j][k] = g;
            }
        }

        let origin = union.corner(0);
        let mut cuts = Vec::with_capacity(d);
        for t in 0..d {
            let mut coords: Vec<f64> = gamma[0].iter().map(|g| g[t]).collect();
            coords.sort_by(f64::total_cmp);
            let end = origin[t] + beta;
            let mut axis = vec![origin[t]];
            for c in coords {
                let last = *axis.last().unwrap();
                if c - last > tol && end - c > tol {
                    axis.push(c);
                }
            }
            axis.push(end);
            cuts.push(axis);
        }

        // Interval [c_i, c_{i+1}) of Q_0 lands in Q_k after a shift by the
        // unique m with alpha_k <= c_i + beta * m < alpha_k + beta.
        let offsets: Vec<Vec<Vec<i64>>> = (0..p)
            .map(|k| {
                (0..d)
                    .map(|t| {
                        let axis = &cuts[t];
                        axis[..axis.len() - 1]
                            .iter()
                            .map(|lo| ((union.corner(k)[t] - lo) / beta - COORD_TOL).ceil() as i64)
                            .collect()
                    })
                    .collect()
            })
            .collect();

        let counts: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
        let cell_count: usize = counts.iter().product();
        let cells = (0..cell_count)
            .map(|s| {
                let idx = multi_index(s, &counts);
                Rect {
                    lo: (0..d).map(|t| cuts[t][idx[t]]).collect(),
                    hi: (0..d).map(|t| cuts[t][idx[t] + 1]).collect(),
                }
            })
            .collect();

        let partition = Self {
            dim: d,
            beta,
            cubes: p,
            cuts,
            offsets,
            wrap,
            gamma,
            cells,
        };
        partition.check_tiling(union)?;
        Ok(partition)
    }

    /// Per axis, the translated intervals of cube `j` must tile
    /// `[alpha_j, alpha_j + beta)`; the product structure makes this
    /// equivalent to the cells tiling `Q_j`.
    fn check_tiling(&self, union: &CubeUnion) -> Result<(), GeometryError> {
        let tol = COORD_TOL * self.beta;
        for j in 0..self.cubes {
            let mut gap = 0.0f64;
            for t in 0..self.dim {
                let axis = &self.cuts[t];
                let mut pieces: Vec<(f64, f64)> = (0..axis.len() - 1)
                    .map(|i| {
                        let shift = self.beta * self.offsets[j][t][i] as f64;
                        (axis[i] + shift, axis[i + 1] + shift)
                    })
                    .collect();
                pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut cursor = union.corner(j)[t];
                for (lo, hi) in pieces {
                    gap += (lo - cursor).abs();
                    cursor = hi;
                }
                gap += (union.corner(j)[t] + self.beta - cursor).abs();
            }
            if gap > tol * self.dim as f64 || gap.is_nan() {
                return Err(GeometryError::Tiling { cube: j, gap });
            }
            let measure: f64 = (0..self.cell_count())
                .map(|s| self.cell(j, s).overlap_measure(&union.cube(j)))
                .sum();
            let full = self.beta.powi(self.dim as i32);
            if (measure - full).abs() > tol * full / self.beta * self.dim as f64 {
                return Err(GeometryError::Tiling {
                    cube: j,
                    gap: (measure - full).abs(),
                });
            }
        }
        // distinct translation sets follow from disjoint cubes; assert them anyway
        for s in 0..self.cell_count() {
            let mut offs: Vec<Vec<i64>> = (0..self.cubes).map(|k| self.cell_offset(k, s)).collect();
            offs.sort();
            offs.dedup();
            if offs.len() != self.cubes {
                return Err(GeometryError::Tiling { cube: 0, gap: 0.0 });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of cubes `p`.
    pub fn cubes(&self) -> usize {
        self.cubes
    }

    /// Number of cells per cube `S`.
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Breakpoints of `Q_0` on axis `t`, end faces included.
    pub fn cuts(&self, t: usize) -> &[f64] {
        &self.cuts[t]
    }

    /// Reference cells `Q_0^s`.
    pub fn cells(&self) -> &[Rect] {
        &self.cells
    }

    pub fn axis_counts(&self) -> Vec<usize> {
        self.cuts.iter().map(|c| c.len() - 1).collect()
    }

    /// Per-axis interval indices of cell `s`.
    pub fn cell_axes(&self, s: usize) -> Vec<usize> {
        multi_index(s, &self.axis_counts())
    }

    /// Offset (units of beta) of interval `i` on axis `t` inside cube `j`.
    pub fn axis_offset(&self, j: usize, t: usize, i: usize) -> i64 {
        self.offsets[j][t][i]
    }

    /// `m_j(s) = n_0j + C_0s(j)`, so that `Q_j^s = Q_0^s + beta * m_j(s)`.
    pub fn cell_offset(&self, j: usize, s: usize) -> Vec<i64> {
        self.cell_axes(s)
            .iter()
            .enumerate()
            .map(|(t, &i)| self.offsets[j][t][i])
            .collect()
    }

    /// The cell `Q_j^s`.
    pub fn cell(&self, j: usize, s: usize) -> Rect {
        self.cells[s].translated(&self.cell_offset(j, s), self.beta)
    }

    pub fn wrap(&self, j: usize, k: usize) -> &[i64] {
        &self.wrap[j][k]
    }

    pub fn gamma(&self, j: usize, k: usize) -> &[f64] {
        &self.gamma[j][k]
    }

    /// Correction `C_js(k)`, the adjustment of `n_jk` that carries `Q_j^s` exactly onto `Q_k^s`.
    pub fn correction(&self, j: usize, s: usize, k: usize) -> Vec<i64> {
        let (mj, mk) = (self.cell_offset(j, s), self.cell_offset(k, s));
        (0..self.dim)
            .map(|t| mk[t] - mj[t] - self.wrap[j][k][t])
            .collect()
    }

    /// Translation set `C_js = {n_jk + C_js(k)}_k`, ordered by `k`; entry `j` is zero.
    pub fn translation_set(&self, j: usize, s: usize) -> Vec<Vec<i64>> {
        let mj = self.cell_offset(j, s);
        (0..self.cubes)
            .map(|k| {
                self.cell_offset(k, s)
                    .iter()
                    .zip(&mj)
                    .map(|(a, b)| a - b)
                    .collect()
            })
            .collect()
    }

    /// The cell `(j, s)` containing `omega` under half-open conventions.
    pub fn cell_of(&self, union: &CubeUnion, omega: &[f64]) -> Option<(usize, usize)> {
        let j = union.cube_of(omega)?;
        let counts = self.axis_counts();
        let mut s = 0;
        for t in 0..self.dim {
            let axis = &self.cuts[t];
            let local = |i: usize| {
                let shift = self.beta * self.offsets[j][t][i] as f64;
                (axis[i] + shift, axis[i + 1] + shift)
            };
            let x = omega[t];
            let hit = (0..counts[t]).find(|&i| {
                let (lo, hi) = local(i);
                lo <= x && x < hi
            });
            // rounding can leave ulp-wide slivers between translated faces
            let i = hit.unwrap_or_else(|| {
                (0..counts[t])
                    .min_by(|&a, &b| {
                        let dist = |i: usize| {
                            let (lo, hi) = local(i);
                            (lo - x).max(x - hi).max(0.0)
                        };
                        dist(a).total_cmp(&dist(b))
                    })
                    .unwrap()
            });
            s = s * counts[t] + i;
        }
        Some((j, s))
    }
}

fn multi_index(mut s: usize, counts: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; counts.len()];
    for t in (0..counts.len()).rev() {
        idx[t] = s % counts[t];
        s /= counts[t];
    }
    idx
}
