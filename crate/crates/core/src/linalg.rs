//! Dense row-major matrices and a jittered Cholesky factorization.

use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let start = i * other.cols;
                for (o, b) in out.data[start..start + other.cols].iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Submatrix with the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    /// Replaces the matrix with `(A + Aᵀ) / 2`.
    pub fn symmetrize(&mut self) {
        assert!(self.is_square());
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor with strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriangular {
    factor: Arc<Matrix>,
    jitter: f64,
}

impl LowerTriangular {
    pub fn size(&self) -> usize {
        self.factor.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.factor
    }

    pub fn into_matrix(self) -> Matrix {
        Arc::unwrap_or_clone(self.factor)
    }

    /// Shared handle to the factor.
    pub fn shared(&self) -> Arc<Matrix> {
        Arc::clone(&self.factor)
    }

    /// Diagonal jitter that was added before the factorization succeeded.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// `L · Lᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        self.factor.matmul(&self.factor.transpose())
    }
}

/// Jitter schedule for [`cholesky_factor`].
///
/// On failure the factorization is retried with `eps · scale · I` added,
/// where `scale` is the largest diagonal entry and `eps` doubles from
/// `initial` while it stays at or below `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterPolicy {
    pub initial: f64,
    pub max: f64,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        Self {
            initial: 1e-10,
            max: 1e-6,
        }
    }
}

impl JitterPolicy {
    /// No retries: fail on the first non-positive pivot.
    pub fn none() -> Self {
        Self {
            initial: 0.0,
            max: 0.0,
        }
    }
}

/// Cholesky factorization `A = L Lᵀ`, retrying with diagonal jitter.
pub fn cholesky_factor(matrix: &Matrix, policy: JitterPolicy) -> Result<LowerTriangular> {
    if !matrix.is_square() || matrix.rows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "cholesky needs a nonempty square matrix, got {}x{}",
            matrix.rows(),
            matrix.cols()
        )));
    }
    let scale = (0..matrix.rows())
        .map(|i| matrix[(i, i)])
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut last_pivot = match try_cholesky(matrix, 0.0) {
        Ok(factor) => {
            return Ok(LowerTriangular {
                factor: Arc::new(factor),
                jitter: 0.0,
            })
        }
        Err(pivot) => pivot,
    };
    let mut eps = policy.initial;
    let mut last_jitter = 0.0;
    while eps > 0.0 && eps <= policy.max * (1.0 + 1e-12) {
        let jitter = eps * scale;
        match try_cholesky(matrix, jitter) {
            Ok(factor) => {
                return Ok(LowerTriangular {
                    factor: Arc::new(factor),
                    jitter,
                })
            }
            Err(pivot) => {
                last_pivot = pivot;
                last_jitter = jitter;
            }
        }
        eps *= 2.0;
    }
    Err(Error::NotPositiveDefinite {
        pivot: last_pivot,
        jitter: last_jitter,
    })
}

fn try_cholesky(a: &Matrix, jitter: f64) -> std::result::Result<Matrix, usize> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let lj = j * n;
        let mut d = a[(j, j)] + jitter;
        d -= l.data[lj..lj + j].iter().map(|v| v * v).sum::<f64>();
        if d.is_nan() || d <= 0.0 {
            return Err(j);
        }
        let djj = d.sqrt();
        l.data[lj + j] = djj;
        for i in (j + 1)..n {
            let li = i * n;
            let dot: f64 = l.data[li..li + j]
                .iter()
                .zip(&l.data[lj..lj + j])
                .map(|(x, y)| x * y)
                .sum();
            l.data[li + j] = (a[(i, j)] - dot) / djj;
        }
    }
    Ok(l)
}
