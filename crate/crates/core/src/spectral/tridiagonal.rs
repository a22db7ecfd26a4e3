//! Implicit-shift QL iteration for symmetric tridiagonal matrices.

use crate::error::{Error, Result};

/// Iteration budget per eigenvalue.
const MAX_ITER_PER_EIGENVALUE: usize = 30;

/// Diagonalizes the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i + 1`, `e.len() == d.len() - 1`).
///
/// On return `d` holds the (unsorted) eigenvalues. When `z` is given it must
/// hold an `n × n` row-major matrix, usually the identity; the rotations are
/// accumulated into it so that column `j` becomes the eigenvector of `d[j]`.
pub fn ql_implicit(d: &mut [f64], e: &[f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    assert_eq!(e.len() + 1, n, "off-diagonal length mismatch");
    if let Some(z) = z.as_deref() {
        assert_eq!(z.len(), n * n, "eigenvector buffer size mismatch");
    }
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).collect();

    let mut total = 0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            total += 1;
            if iter > MAX_ITER_PER_EIGENVALUE {
                return Err(Error::NoConvergence { iterations: total });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let row = k * n;
                        let f = z[row + i + 1];
                        z[row + i + 1] = s * z[row + i] + c * f;
                        z[row + i] = c * z[row + i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
