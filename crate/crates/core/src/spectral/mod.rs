//! Symmetric eigendecomposition and functions of multiplication matrices.
//!
//! Tridiagonal input (always the case for `M_n[id]`) goes through implicit
//! QL; anything else through cyclic Jacobi. Eigenvalues are returned in
//! ascending order and each eigenvector is signed so that its
//! largest-magnitude component is positive.

mod jacobi;
mod tridiagonal;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;
use crate::opmatrix::MultiplicationMatrix;

pub use jacobi::{cyclic_jacobi, MAX_SWEEPS};
pub use tridiagonal::ql_implicit;

/// Eigenvalues only of a symmetric tridiagonal matrix, ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let mut d = diag.to_vec();
    ql_implicit(&mut d, off, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Full decomposition of a symmetric matrix: ascending eigenvalues and the
/// row-major eigenvector matrix (column `j` pairs with eigenvalue `j`).
pub fn eigh_symmetric(m: &SymmetricMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = m.dim();
    let (values, vectors) = if m.is_tridiagonal() {
        let mut d = m.diagonal();
        let off: Vec<f64> = (0..n.saturating_sub(1)).map(|i| m.get(i, i + 1)).collect();
        let mut z = SymmetricMatrix::identity(n).row_major().to_vec();
        ql_implicit(&mut d, &off, Some(&mut z))?;
        (d, z)
    } else {
        let mut a = m.row_major().to_vec();
        cyclic_jacobi(&mut a, n)?
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let mut sorted = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        let mut pivot = 0.0f64;
        for i in 0..n {
            let v = vectors[i * n + old];
            if v.abs() > pivot.abs() {
                pivot = v;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            sorted[i * n + new] = sign * vectors[i * n + old];
        }
    }
    Ok((sorted_values, sorted))
}

/// Eigenvalues and orthonormal eigenvectors of a multiplication matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<f64>,
    source: MultiplicationMatrix,
}

#[derive(Debug, Serialize, Deserialize)]
struct DecompositionJson {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<f64>,
}

/// Decomposes `m` into `U diag(λ) Uᵀ`.
pub fn eigh(m: &MultiplicationMatrix) -> Result<SpectralDecomposition> {
    let (eigenvalues, eigenvectors) = eigh_symmetric(m.entries())?;
    Ok(SpectralDecomposition { eigenvalues, eigenvectors, source: m.clone() })
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Row-major eigenvector matrix, eigenvector `j` in column `j`.
    pub fn eigenvectors(&self) -> &[f64] {
        &self.eigenvectors
    }

    /// Component `i` of eigenvector `j`.
    #[inline]
    pub fn component(&self, i: usize, j: usize) -> f64 {
        self.eigenvectors[i * self.dim() + j]
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.component(i, j)).collect()
    }

    pub fn source(&self) -> &MultiplicationMatrix {
        &self.source
    }

    /// `f(λ_k)` for every eigenvalue, failing on the first non-finite value.
    pub fn function_values(&self, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(index, &node)| {
                let v = f(node);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::SingularNode { index, node })
                }
            })
            .collect()
    }

    /// `U diag(f(λ)) Uᵀ`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> Result<SymmetricMatrix> {
        let fv = self.function_values(f)?;
        let n = self.dim();
        let mut out = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|k| fv[k] * self.component(i, k) * self.component(j, k)).sum();
                out.set(i, j, s);
            }
        }
        Ok(out)
    }

    /// `Σ_k f(λ_k) u_{ik} u_{jk}` without forming the whole matrix.
    pub fn entry_of_function(&self, f: impl Fn(f64) -> f64, i: usize, j: usize) -> Result<f64> {
        let fv = self.function_values(f)?;
        Ok(fv.iter().enumerate().map(|(k, v)| v * self.component(i, k) * self.component(j, k)).sum())
    }

    /// `max_j ‖M u_j - λ_j u_j‖₂`.
    pub fn max_residual(&self) -> f64 {
        let m = self.source.entries();
        (0..self.dim())
            .map(|j| {
                let u = self.eigenvector(j);
                m.mul_vec(&u)
                    .iter()
                    .zip(&u)
                    .map(|(mu, ui)| (mu - self.eigenvalues[j] * ui).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `‖UᵀU - I‖_max`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let dot: f64 = (0..n).map(|i| self.component(i, a) * self.component(i, b)).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DecompositionJson {
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: self.eigenvectors.clone(),
        })?)
    }
}
