use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real symmetric matrix stored row-major.
///
/// Symmetry is enforced on construction: `from_row_major` averages the
/// input with its transpose, so `get(i, j) == get(j, i)` holds bitwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Symmetric tridiagonal matrix from its diagonal and first off-diagonal.
    pub fn tridiagonal(diag: &[f64], off: &[f64]) -> Self {
        let dim = diag.len();
        assert_eq!(off.len() + 1, dim.max(1), "off-diagonal length mismatch");
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * dim + i] = d;
        }
        for (i, &b) in off.iter().enumerate() {
            m.data[i * dim + i + 1] = b;
            m.data[(i + 1) * dim + i] = b;
        }
        m
    }

    /// Builds `(A + Aᵀ)/2` from a row-major square array and returns it with
    /// the largest absolute asymmetry `max |a_ij - a_ji|` of the input.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<(Self, f64)> {
        if data.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let mut m = Self { dim, data };
        let mut asym = 0.0f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = m.data[i * dim + j];
                let b = m.data[j * dim + i];
                asym = asym.max((a - b).abs());
                let s = 0.5 * (a + b);
                m.data[i * dim + j] = s;
                m.data[j * dim + i] = s;
            }
        }
        Ok((m, asym))
    }

    /// Number of rows (`n + 1` for the order-`n` truncation).
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Leading principal `dim × dim` submatrix.
    pub fn leading(&self, dim: usize) -> Self {
        assert!(dim <= self.dim, "leading block larger than matrix");
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim..(i + 1) * dim].copy_from_slice(&self.data[i * self.dim..i * self.dim + dim]);
        }
        m
    }

    /// True when every entry with `|i - j| >= 2` is exactly zero.
    pub fn is_tridiagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).filter(|&j| i.abs_diff(j) >= 2).all(|j| self.get(i, j) == 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm, an upper bound on the spectral norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Plain matrix product, returned row-major. The product of two
    /// symmetric matrices is symmetric only when they commute.
    pub fn matmul(&self, other: &Self) -> Vec<f64> {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}
