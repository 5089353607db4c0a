//! Small dense complex matrices and LU factorization with partial pivoting.

use num_complex::Complex64;
use thiserror::Error;

/// Pivots smaller than this (relative to the largest entry of the input)
/// are treated as exact zeros.
const PIVOT_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("matrix is singular to working precision (pivot {pivot} at column {column})")]
pub struct Singular {
    pub column: usize,
    pub pivot: usize,
}

/// Square row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                data.push(f(r, c));
            }
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.n + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.n..(r + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Lu {
        Lu::factor(self)
    }
}

/// `P A = L U`, stored compactly: unit-lower `L` below the diagonal, `U` on
/// and above it.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: CMatrix,
    perm: Vec<usize>,
    swaps: usize,
    singular: Option<Singular>,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Self {
        let n = a.size();
        let mut m = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = None;
        let threshold = PIVOT_TOL * a.max_abs();

        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, m.get(r, col).norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_row != col {
                for c in 0..n {
                    m.data.swap(col * n + c, pivot_row * n + c);
                }
                perm.swap(col, pivot_row);
                swaps += 1;
            }
            if pivot_abs <= threshold {
                singular.get_or_insert(Singular {
                    column: col,
                    pivot: perm[col],
                });
                continue;
            }
            let pivot = m.get(col, col);
            for r in col + 1..n {
                let factor = m.get(r, col) / pivot;
                m.set(r, col, factor);
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in col + 1..n {
                    let v = m.get(r, c) - factor * m.get(col, c);
                    m.set(r, c, v);
                }
            }
        }

        Self {
            factors: m,
            perm,
            swaps,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular.is_some()
    }

    /// Determinant; exactly zero once a pivot falls below tolerance.
    pub fn det(&self) -> Complex64 {
        if self.singular.is_some() {
            return Complex64::new(0.0, 0.0);
        }
        let diag: Complex64 = (0..self.factors.size())
            .map(|i| self.factors.get(i, i))
            .product();
        if self.swaps % 2 == 0 {
            diag
        } else {
            -diag
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>, Singular> {
        if let Some(s) = self.singular {
            return Err(s);
        }
        let n = self.factors.size();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&i| b[i]).collect();
        for r in 0..n {
            let mut acc = x[r];
            for c in 0..r {
                acc -= self.factors.get(r, c) * x[c];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for c in r + 1..n {
                acc -= self.factors.get(r, c) * x[c];
            }
            x[r] = acc / self.factors.get(r, r);
        }
        Ok(x)
    }
}
