//! Matrix elements `[M_n[g]]_{ij} = ∫ φ_i g φ_j w dx` and Fourier
//! coefficients `v_i = ⟨φ_i, h⟩`.
//!
//! Elements are first computed with Gauss rules of the basis family itself
//! at orders 64, 128, 256 and 512. An element is accepted once two successive
//! orders agree to `tol` relative to `Σ |g ψ_i ψ_j|`, the scale of the sum.
//! For polynomial `g` this happens at the first comparison. Elements that
//! never settle (endpoint behaviour such as `√x`, or growth that the Gauss
//! rule resolves poorly) are integrated by adaptive Gauss–Kronrod on the
//! compactified domain, all of them over one shared subdivision.
//!
//! The square integrability condition `∫ |g φ_i|² w < ∞` is not checked; an
//! element that converges under neither integrator is reported as
//! [`Error::NonConvergentElement`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptive;
use crate::basis::BasisFamily;
use crate::error::{Error, Result};
use crate::functions::{self, ScalarFn};
use crate::gauss;
use crate::matrix::SymmetricMatrix;

/// Escalating Gauss orders tried before the adaptive fallback.
pub const GAUSS_ORDERS: [usize; 4] = [64, 128, 256, 512];

/// Pairs per adaptive batch. Batches run in parallel, each on its own
/// subdivision.
const FALLBACK_BATCH: usize = 128;

/// The symmetric matrix `M_n[g]` of order `n` (size `(n+1) × (n+1)`).
#[derive(Debug, Clone)]
pub struct MultiplicationMatrix {
    basis: BasisFamily,
    inside_function: String,
    entries: SymmetricMatrix,
    requested_tolerance: f64,
    element_tolerance: f64,
    max_asymmetry: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixJson {
    basis: String,
    g: String,
    n: usize,
    entries: Vec<f64>,
    tol: f64,
}

impl MultiplicationMatrix {
    /// Assembles a matrix from already computed entries.
    pub fn from_parts(
        basis: BasisFamily,
        inside_function: String,
        entries: SymmetricMatrix,
        element_tolerance: f64,
        max_asymmetry: f64,
    ) -> Self {
        assert!(entries.dim() >= 1, "a multiplication matrix has at least one row");
        Self {
            basis,
            inside_function,
            entries,
            requested_tolerance: element_tolerance,
            element_tolerance,
            max_asymmetry,
        }
    }

    /// Order `n`; the matrix has `n + 1` rows.
    pub fn order(&self) -> usize {
        self.entries.dim() - 1
    }

    pub fn entries(&self) -> &SymmetricMatrix {
        &self.entries
    }

    pub fn basis(&self) -> &BasisFamily {
        &self.basis
    }

    pub fn inside_function(&self) -> &str {
        &self.inside_function
    }

    /// Tolerance the elements were requested at.
    pub fn requested_tolerance(&self) -> f64 {
        self.requested_tolerance
    }

    /// Worst achieved relative error estimate over all entries.
    pub fn element_tolerance(&self) -> f64 {
        self.element_tolerance
    }

    /// Largest `|a_ij - a_ji|` seen before symmetrization.
    pub fn max_asymmetry(&self) -> f64 {
        self.max_asymmetry
    }

    /// `M_m[g]` as the leading principal block, `m ≤ n`.
    pub fn leading(&self, order: usize) -> Self {
        Self { entries: self.entries.leading(order + 1), ..self.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&MatrixJson {
            basis: self.basis.name().to_string(),
            g: self.inside_function.clone(),
            n: self.order(),
            entries: self.entries.row_major().to_vec(),
            tol: self.requested_tolerance,
        })?)
    }

    /// Reads the JSON written by [`to_json`](Self::to_json). The basis must be
    /// one of the named families.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MatrixJson = serde_json::from_str(text)?;
        let basis = BasisFamily::from_name(&raw.basis)?;
        let (entries, asym) = SymmetricMatrix::from_row_major(raw.n + 1, raw.entries)?;
        if entries.row_major().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()));
        }
        Ok(Self {
            basis,
            inside_function: raw.g,
            entries,
            requested_tolerance: raw.tol,
            element_tolerance: raw.tol,
            max_asymmetry: asym,
        })
    }
}

/// Coefficients `v_i = ⟨φ_i, h⟩` for `i = 0..=n`.
#[derive(Debug, Clone)]
pub struct CoefficientVector {
    pub values: Vec<f64>,
    pub basis: String,
    pub source_function: String,
}

impl CoefficientVector {
    /// `e_k` of length `n + 1`, the coefficients of `φ_k` itself.
    pub fn unit(basis: &BasisFamily, n: usize, k: usize) -> Self {
        let mut values = vec![0.0; n + 1];
        values[k] = 1.0;
        Self { values, basis: basis.name().to_string(), source_function: format!("phi{k}") }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self { values: self.values[..=n].to_vec(), ..self.clone() }
    }
}

/// Entrywise sign in `{+, 0, -}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "-")]
    Negative,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Zero => '0',
            Sign::Negative => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignReport {
    pub pattern: Vec<Vec<Sign>>,
    pub all_nonnegative: bool,
}

impl SignReport {
    /// Rows of `+`/`0`/`-` characters.
    pub fn rows(&self) -> Vec<String> {
        self.pattern.iter().map(|r| r.iter().map(|s| s.symbol()).collect()).collect()
    }
}

/// Signs of `M` with entries below `1e-10 · max|entry|` counted as zero.
pub fn sign_report(m: &MultiplicationMatrix) -> SignReport {
    let e = m.entries();
    let threshold = 1e-10 * e.max_abs();
    let pattern: Vec<Vec<Sign>> = (0..e.dim())
        .map(|i| {
            (0..e.dim())
                .map(|j| {
                    let v = e.get(i, j);
                    if v.abs() <= threshold {
                        Sign::Zero
                    } else if v > 0.0 {
                        Sign::Positive
                    } else {
                        Sign::Negative
                    }
                })
                .collect()
        })
        .collect();
    let all_nonnegative = pattern.iter().flatten().all(|s| *s != Sign::Negative);
    SignReport { pattern, all_nonnegative }
}

/// Integrated value of one `(i, j)` pair.
#[derive(Debug, Clone, Copy)]
struct PairValue {
    value: f64,
    /// Achieved error relative to the absolute-value integral.
    relative_error: f64,
}

/// Integrates `∫ φ_i g φ_j w dx` for each pair, all indices `≤ n`.
fn integrate_pairs(
    basis: &BasisFamily,
    g: &ScalarFn,
    pairs: &[(usize, usize)],
    n: usize,
    tol: f64,
) -> Result<Vec<PairValue>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut result: Vec<Option<PairValue>> = vec![None; pairs.len()];
    let mut previous: Option<Vec<f64>> = None;

    for &order in &GAUSS_ORDERS {
        if order <= n {
            continue;
        }
        let rule = gauss::rule(basis, order)?;
        let table = basis.table(n);
        let psi = rule.scaled_basis(&table, n);
        let width = n + 1;
        let gv: Vec<f64> = rule.nodes().iter().map(|&x| g.eval(x)).collect();

        let mut sums = vec![0.0; pairs.len()];
        let mut magnitudes = vec![0.0; pairs.len()];
        for (p, &(i, j)) in pairs.iter().enumerate() {
            if result[p].is_some() {
                continue;
            }
            let (mut s, mut a) = (0.0, 0.0);
            for m in 0..rule.order() {
                let prod = psi[m * width + i] * psi[m * width + j];
                if prod == 0.0 {
                    continue;
                }
                let t = gv[m] * prod;
                s += t;
                a += t.abs();
            }
            sums[p] = s;
            magnitudes[p] = a;
        }
        if let Some(prev) = &previous {
            for p in 0..pairs.len() {
                if result[p].is_some() || !sums[p].is_finite() || !prev[p].is_finite() {
                    continue;
                }
                let diff = (sums[p] - prev[p]).abs();
                let scale = magnitudes[p];
                if diff <= tol * scale || (scale == 0.0 && diff == 0.0) {
                    result[p] = Some(PairValue {
                        value: sums[p],
                        relative_error: if scale > 0.0 { diff / scale } else { 0.0 },
                    });
                }
            }
        }
        if result.iter().all(Option::is_some) {
            break;
        }
        previous = Some(sums);
    }

    let pending: Vec<usize> = (0..pairs.len()).filter(|&p| result[p].is_none()).collect();
    if !pending.is_empty() {
        let fallback: Vec<Result<Vec<(usize, PairValue)>>> = pending
            .par_chunks(FALLBACK_BATCH)
            .map(|batch| adaptive_pairs(basis, g, pairs, batch, n, tol))
            .collect();
        for batch in fallback {
            for (p, v) in batch? {
                result[p] = Some(v);
            }
        }
    }
    Ok(result.into_iter().map(|v| v.expect("every pair resolved")).collect())
}

fn adaptive_pairs(
    basis: &BasisFamily,
    g: &ScalarFn,
    pairs: &[(usize, usize)],
    batch: &[usize],
    n: usize,
    tol: f64,
) -> Result<Vec<(usize, PairValue)>> {
    let table = basis.table(n);
    let outcome = adaptive::integrate_vec(
        basis.domain(),
        batch.len(),
        |x, out| {
            let ln_w = basis.ln_weight(x);
            let gw = if ln_w == f64::NEG_INFINITY { 0.0 } else { g.eval_scaled(x, ln_w) };
            if gw == 0.0 {
                out.fill(0.0);
                return;
            }
            let mut phi = vec![0.0; n + 1];
            table.eval_all(x, &mut phi);
            for (slot, &p) in out.iter_mut().zip(batch) {
                let (i, j) = pairs[p];
                *slot = gw * phi[i] * phi[j];
            }
        },
        tol,
    );
    if !outcome.converged {
        let (k, ratio) = outcome.worst(tol).unwrap_or((0, f64::INFINITY));
        let (i, j) = pairs[batch[k]];
        let est = outcome.estimates[k];
        return Err(Error::NonConvergentElement {
            i,
            j,
            detail: format!(
                "Gauss orders {GAUSS_ORDERS:?} disagree and adaptive quadrature stopped at {} intervals \
                 (value {}, error {:e}, {ratio:.1}x the allowance)",
                outcome.intervals, est.value, est.error
            ),
        });
    }
    Ok(batch
        .iter()
        .zip(&outcome.estimates)
        .map(|(&p, e)| {
            (
                p,
                PairValue {
                    value: e.value,
                    relative_error: if e.magnitude > 0.0 { e.error / e.magnitude } else { 0.0 },
                },
            )
        })
        .collect())
}

/// One matrix element `∫ φ_i g φ_j w dx` to relative tolerance `tol`.
pub fn element(basis: &BasisFamily, g: &ScalarFn, i: usize, j: usize, tol: f64) -> Result<f64> {
    let v = integrate_pairs(basis, g, &[(i, j)], i.max(j), tol)?;
    Ok(v[0].value)
}

/// `M_n[g]`: all `(n+1)²` elements, then `(A + Aᵀ)/2`.
pub fn build_matrix(basis: &BasisFamily, g: &ScalarFn, n: usize, tol: f64) -> Result<MultiplicationMatrix> {
    let dim = n + 1;
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).collect();
    let values = integrate_pairs(basis, g, &pairs, n, tol)?;
    let achieved = values.iter().map(|v| v.relative_error).fold(0.0, f64::max);
    let (entries, asym) = SymmetricMatrix::from_row_major(dim, values.iter().map(|v| v.value).collect())?;
    Ok(MultiplicationMatrix {
        basis: basis.clone(),
        inside_function: g.label().to_string(),
        entries,
        requested_tolerance: tol,
        element_tolerance: achieved,
        max_asymmetry: asym,
    })
}

/// Fourier coefficients `∫ h φ_i w dx`, `i = 0..=n`. These are the first
/// column of `M_n[h]` because `φ_0 = 1`.
pub fn fourier_coeffs(basis: &BasisFamily, h: &ScalarFn, n: usize, tol: f64) -> Result<CoefficientVector> {
    let pairs: Vec<(usize, usize)> = (0..=n).map(|i| (i, 0)).collect();
    let values = integrate_pairs(basis, h, &pairs, n, tol)?;
    Ok(CoefficientVector {
        values: values.iter().map(|v| v.value).collect(),
        basis: basis.name().to_string(),
        source_function: h.label().to_string(),
    })
}

/// Convenience for the registry: `build_matrix` with `g` given by name or
/// expression.
pub fn build_matrix_named(basis: &BasisFamily, g: &str, n: usize, tol: f64) -> Result<MultiplicationMatrix> {
    build_matrix(basis, &functions::resolve(g)?, n, tol)
}
