//! Cyclic Jacobi rotations for dense symmetric matrices.
//!
//! A rotation is skipped when `|a_pq| ≤ ε √|a_pp a_qq|`. That threshold
//! leaves small eigenvector components with good relative accuracy on
//! graded positive definite matrices, which matters when the quadrature
//! weights `u_{0j}²` multiply rapidly growing outside functions.

use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 30;

/// Diagonalizes the row-major symmetric `n × n` matrix `a` in place.
/// Returns the (unsorted) eigenvalues and the row-major eigenvector matrix
/// with eigenvector `j` in column `j`.
pub fn cyclic_jacobi(a: &mut [f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(a.len(), n * n);
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq.abs() <= f64::EPSILON * (app * aqq).abs().sqrt() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                rotated = true;

                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let np = c * arp - s * arq;
                    let nq = s * arp + c * arq;
                    a[r * n + p] = np;
                    a[p * n + r] = np;
                    a[r * n + q] = nq;
                    a[q * n + r] = nq;
                }
                for r in 0..n {
                    let vrp = v[r * n + p];
                    let vrq = v[r * n + q];
                    v[r * n + p] = c * vrp - s * vrq;
                    v[r * n + q] = s * vrp + c * vrq;
                }
            }
        }
        if !rotated {
            let values = (0..n).map(|i| a[i * n + i]).collect();
            return Ok((values, v));
        }
        if sweep + 1 == MAX_SWEEPS {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: MAX_SWEEPS })
}
