//! Gauss rules of a basis family at large orders, used as the first-line
//! integrator for matrix elements.
//!
//! Nodes come from the eigenvalues of the order-`N` Jacobi matrix, polished
//! by Newton steps on `φ_N`. Weights come from the Christoffel function
//! `w_m = 1 / Σ_{k<N} φ_k(x_m)²`, accumulated with rescaling so that the
//! far nodes of Laguerre and Hermite rules (weights far below `f64::MIN`)
//! still yield `√w_m` whenever it is representable.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::basis::{BasisFamily, RecurrenceTable};
use crate::error::Result;
use crate::spectral::tridiagonal_eigenvalues;

const RESCALE_AT: f64 = 1e100;
const RESCALE_BY: f64 = 1e-100;

#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    sqrt_weights: Vec<f64>,
}

impl GaussRule {
    /// The `order`-point Gauss rule of `family`.
    pub fn new(family: &BasisFamily, order: usize) -> Result<Self> {
        assert!(order >= 1, "Gauss rule needs at least one node");
        let table = family.table(order);
        let diag: Vec<f64> = (0..order).map(|k| family.recurrence_coeffs(k).0).collect();
        let off: Vec<f64> = (1..order).map(|k| family.off_diagonal(k)).collect();
        let mut nodes = tridiagonal_eigenvalues(&diag, &off)?;
        polish_nodes(&table, &mut nodes);
        let sqrt_weights = nodes.iter().map(|&x| sqrt_christoffel(&table, order, x)).collect();
        Ok(Self { nodes, sqrt_weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `√w_m`; zero where the weight is below the representable range squared.
    pub fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.sqrt_weights.iter().map(|s| s * s).collect()
    }

    /// Row-major `order × (n+1)` table of `ψ_k(x_m) = √w_m φ_k(x_m)`.
    /// These are the normalized eigenvector components of the Jacobi
    /// matrix, bounded by one in magnitude for `k < order`.
    pub fn scaled_basis(&self, table: &RecurrenceTable, n: usize) -> Vec<f64> {
        let width = n + 1;
        let mut out = vec![0.0; self.order() * width];
        for (m, (&x, &s)) in self.nodes.iter().zip(&self.sqrt_weights).enumerate() {
            if s == 0.0 {
                continue;
            }
            table.eval_all_scaled(x, s, &mut out[m * width..(m + 1) * width]);
        }
        out
    }
}

/// `(φ_N(x), φ_N'(x))` up to a common positive factor.
fn value_and_derivative(table: &RecurrenceTable, order: usize, x: f64) -> (f64, f64) {
    let (alpha, off) = table.coefficients();
    let (mut p0, mut p1) = (0.0, 1.0);
    let (mut d0, mut d1) = (0.0, 0.0);
    for k in 0..order {
        let bk = if k == 0 { 0.0 } else { off[k - 1] };
        let p2 = ((x - alpha[k]) * p1 - bk * p0) / off[k];
        let d2 = (p1 + (x - alpha[k]) * d1 - bk * d0) / off[k];
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
        if p1.abs().max(d1.abs()) > RESCALE_AT {
            p0 *= RESCALE_BY;
            p1 *= RESCALE_BY;
            d0 *= RESCALE_BY;
            d1 *= RESCALE_BY;
        }
    }
    (p1, d1)
}

fn polish_nodes(table: &RecurrenceTable, nodes: &mut [f64]) {
    let order = nodes.len();
    let original = nodes.to_vec();
    for m in 0..order {
        let left = if m > 0 { original[m] - original[m - 1] } else { f64::INFINITY };
        let right = if m + 1 < order { original[m + 1] - original[m] } else { f64::INFINITY };
        let reach = 0.25 * left.min(right);
        let mut x = original[m];
        for _ in 0..3 {
            let (p, dp) = value_and_derivative(table, order, x);
            if dp == 0.0 || !p.is_finite() || !dp.is_finite() {
                break;
            }
            let step = p / dp;
            if !step.is_finite() || step.abs() >= reach || (x - step - original[m]).abs() > reach {
                break;
            }
            x -= step;
            if step.abs() <= 4.0 * f64::EPSILON * x.abs() {
                break;
            }
        }
        nodes[m] = x;
    }
}

/// `1/√(Σ_{k<order} φ_k(x)²)`, accumulated in rescaled form.
fn sqrt_christoffel(table: &RecurrenceTable, order: usize, x: f64) -> f64 {
    let (alpha, off) = table.coefficients();
    let (mut p0, mut p1) = (0.0, 1.0);
    let mut sum = 1.0;
    let mut log_scale = 0.0;
    for k in 0..order - 1 {
        let bk = if k == 0 { 0.0 } else { off[k - 1] };
        let p2 = ((x - alpha[k]) * p1 - bk * p0) / off[k];
        p0 = p1;
        p1 = p2;
        sum += p1 * p1;
        if p1.abs() > RESCALE_AT {
            p0 *= RESCALE_BY;
            p1 *= RESCALE_BY;
            sum *= RESCALE_BY * RESCALE_BY;
            log_scale -= RESCALE_BY.ln();
        }
    }
    (-log_scale).exp() / sum.sqrt()
}

type CacheKey = (String, usize);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss rule of `family`, memoized for the classical families.
pub fn rule(family: &BasisFamily, order: usize) -> Result<Arc<GaussRule>> {
    if !family.is_classical() {
        return Ok(Arc::new(GaussRule::new(family, order)?));
    }
    let key = (family.name().to_string(), order);
    if let Some(r) = cache().lock().expect("gauss cache poisoned").get(&key) {
        return Ok(Arc::clone(r));
    }
    let built = Arc::new(GaussRule::new(family, order)?);
    let mut guard = cache().lock().expect("gauss cache poisoned");
    Ok(Arc::clone(guard.entry(key).or_insert(built)))
}
