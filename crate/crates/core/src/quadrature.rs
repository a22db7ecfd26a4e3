//! Quadrature rules from spectral data and the integral approximations built
//! on them.
//!
//! With eigenpairs `(λ_j, u_j)` of `M_n[g]`, coefficients `v` of a weighting
//! function and its node-side form `H`, the rule has nodes `λ_j` and weights
//! `w_j = (v·u_j)² / H(λ_j)²`. For `H = 1` and `v = e₀` these are the
//! generalized Gauss weights `u_{0j}²`.
//!
//! Every outside function here is a function of the nodes. To approximate
//! `∫ f(x) w dx` with inside function `g`, pass `F = f ∘ g⁻¹`.
//!
//! The convergence result behind the reweighted rule asks for `|F| ≤ H²` and
//! `H² ≥ c > 0`; only `H(λ_j) ≠ 0` is checked.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;
use crate::error::{Error, Result};
use crate::functions::ScalarFn;
use crate::opmatrix::{self, CoefficientVector};
use crate::spectral::{self, SpectralDecomposition};

/// Smallest `|H(λ_j)|` accepted as a weighting value.
pub const MIN_WEIGHTING: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub basis: String,
    pub g: String,
    pub weighting: String,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ_j w_j F(λ_j)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let mut sum = 0.0;
        for (index, (&node, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let v = f(node);
            if !v.is_finite() {
                return Err(Error::SingularNode { index, node });
            }
            sum += w * v;
        }
        Ok(sum)
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// CSV with header `node,weight`, ascending nodes, 17 significant digits.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "weight"])?;
        for (x, wt) in self.nodes.iter().zip(&self.weights) {
            w.write_record([format!("{x:.16e}"), format!("{wt:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Rule with weights `(v·u_j)² / H(λ_j)²`.
pub fn rule_from_matrix(
    dec: &SpectralDecomposition,
    h: &ScalarFn,
    v: &CoefficientVector,
) -> Result<QuadratureRule> {
    let dim = dec.dim();
    if v.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "coefficient vector has {} entries, matrix has {dim} rows",
            v.len()
        )));
    }
    let mut weights = Vec::with_capacity(dim);
    for (j, &node) in dec.eigenvalues().iter().enumerate() {
        let hv = h.eval(node);
        if !hv.is_finite() || hv.abs() < MIN_WEIGHTING {
            return Err(Error::ZeroWeightingAtNode { index: j, node });
        }
        let proj: f64 = (0..dim).map(|i| v.values[i] * dec.component(i, j)).sum();
        weights.push(proj * proj / (hv * hv));
    }
    let source = dec.source();
    Ok(QuadratureRule {
        basis: source.basis().name().to_string(),
        g: source.inside_function().to_string(),
        weighting: h.label().to_string(),
        order: source.order(),
        nodes: dec.eigenvalues().to_vec(),
        weights,
    })
}

/// The `H = 1`, `v = e₀` rule: weights `u_{0j}²`.
pub fn basic_rule(dec: &SpectralDecomposition) -> QuadratureRule {
    let source = dec.source();
    QuadratureRule {
        basis: source.basis().name().to_string(),
        g: source.inside_function().to_string(),
        weighting: "1".to_string(),
        order: source.order(),
        nodes: dec.eigenvalues().to_vec(),
        weights: (0..dec.dim()).map(|j| dec.component(0, j).powi(2)).collect(),
    }
}

fn decompose(basis: &BasisFamily, g: &ScalarFn, n: usize, tol: f64) -> Result<SpectralDecomposition> {
    spectral::eigh(&opmatrix::build_matrix(basis, g, n, tol)?)
}

/// `[F(M_n[g])]_{00}`.
pub fn integrate_basic(basis: &BasisFamily, g: &ScalarFn, f: &ScalarFn, n: usize, tol: f64) -> Result<f64> {
    decompose(basis, g, n, tol)?.entry_of_function(|x| f.eval(x), 0, 0)
}

/// `uᵀ F(M_n[g]) v = Σ_k F(λ_k)(u·u_k)(u_k·v)`.
pub fn bilinear_from_decomposition(
    dec: &SpectralDecomposition,
    f: &ScalarFn,
    u: &CoefficientVector,
    v: &CoefficientVector,
) -> Result<f64> {
    let dim = dec.dim();
    if u.len() != dim || v.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "coefficient vectors have {} and {} entries, matrix has {dim} rows",
            u.len(),
            v.len()
        )));
    }
    let fv = dec.function_values(|x| f.eval(x))?;
    Ok((0..dim)
        .map(|k| {
            let (mut pu, mut pv) = (0.0, 0.0);
            for i in 0..dim {
                let c = dec.component(i, k);
                pu += u.values[i] * c;
                pv += v.values[i] * c;
            }
            fv[k] * pu * pv
        })
        .sum())
}

pub fn integrate_bilinear(
    basis: &BasisFamily,
    g: &ScalarFn,
    f: &ScalarFn,
    u: &CoefficientVector,
    v: &CoefficientVector,
    n: usize,
    tol: f64,
) -> Result<f64> {
    bilinear_from_decomposition(&decompose(basis, g, n, tol)?, f, u, v)
}

/// `[F₁(M_n[g₁]) F₂(M_n[g₂])]_{00}`.
pub fn integrate_product(
    basis: &BasisFamily,
    g1: &ScalarFn,
    g2: &ScalarFn,
    f1: &ScalarFn,
    f2: &ScalarFn,
    n: usize,
    tol: f64,
) -> Result<f64> {
    let d1 = decompose(basis, g1, n, tol)?;
    let d2 = decompose(basis, g2, n, tol)?;
    let a = d1.apply_function(|x| f1.eval(x))?;
    let b = d2.apply_function(|x| f2.eval(x))?;
    Ok((0..=n).map(|k| a.get(0, k) * b.get(k, 0)).sum())
}

/// Reweighted rule for `F` dominated by `H²`, where `H` is the weighting
/// function on the node side. The coefficients are `v_i = ⟨H∘g, φ_i⟩`.
pub fn integrate_reweighted(
    basis: &BasisFamily,
    g: &ScalarFn,
    f: &ScalarFn,
    h: &ScalarFn,
    n: usize,
    tol: f64,
) -> Result<f64> {
    let dec = decompose(basis, g, n, tol)?;
    let v = opmatrix::fourier_coeffs(basis, &h.compose(g), n, tol)?;
    rule_from_matrix(&dec, h, &v)?.integrate(|x| f.eval(x))
}

/// `min_j |λ_j - c|`.
pub fn endpoint_clearance(rule: &QuadratureRule, c: f64) -> f64 {
    rule.nodes.iter().map(|x| (x - c).abs()).fold(f64::INFINITY, f64::min)
}

/// Default guard for [`integrate_improper`]: `1e-8 (1 + |c|)`.
pub fn default_guard(c: f64) -> f64 {
    1e-8 * (1.0 + c.abs())
}

/// Checks that no node of `rule` lies within `guard` of the singular point.
pub fn check_clearance(rule: &QuadratureRule, c: f64, guard: f64) -> Result<()> {
    let clearance = endpoint_clearance(rule, c);
    if clearance > guard {
        Ok(())
    } else {
        Err(Error::NodeTooCloseToSingularity { point: c, clearance, guard })
    }
}

/// Validates the declared singularity exponent of `a + b/|x - c|^p`.
pub fn check_exponent(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("singularity exponent must lie in [0, 1], got {p}")))
    }
}

/// Basic rule for an `F` with a singularity `a + b/|x - c|^p` at an endpoint
/// `c` of the range of `g`. Refuses to evaluate when a node is within
/// `guard` of `c` (default [`default_guard`]).
#[allow(clippy::too_many_arguments)]
pub fn integrate_improper(
    basis: &BasisFamily,
    g: &ScalarFn,
    f: &ScalarFn,
    c: f64,
    p: f64,
    n: usize,
    tol: f64,
    guard: Option<f64>,
) -> Result<f64> {
    check_exponent(p)?;
    let rule = basic_rule(&decompose(basis, g, n, tol)?);
    check_clearance(&rule, c, guard.unwrap_or_else(|| default_guard(c)))?;
    rule.integrate(|x| f.eval(x))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::functions::{named, resolve};
    use crate::matrix::SymmetricMatrix;
    use crate::opmatrix::MultiplicationMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn lag() -> BasisFamily {
        BasisFamily::laguerre()
    }

    fn factorial(k: u32) -> f64 {
        (1..=k).map(f64::from).product()
    }

    fn gauss(n: usize) -> QuadratureRule {
        basic_rule(&spectral::eigh(&lag().jacobi_matrix(n)).unwrap())
    }

    #[test]
    fn two_point_rule() {
        let r = gauss(1);
        let s = 2f64.sqrt();
        assert!((r.nodes[0] - (2.0 - s)).abs() < 1e-15);
        assert!((r.nodes[1] - (2.0 + s)).abs() < 1e-14);
        assert!((r.weights[0] - (2.0 + s) / 4.0).abs() < 1e-15);
        assert!((r.weights[1] - (2.0 - s) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn one_point_rule() {
        let r = gauss(0);
        assert_eq!(r.nodes, vec![1.0]);
        assert_eq!(r.weights, vec![1.0]);
    }

    #[test]
    fn rule_for_sqrt_matrix() {
        let sp = PI.sqrt();
        let data = vec![
            0.5,
            0.25,
            -1.0 / 16.0, //
            0.25,
            7.0 / 8.0,
            11.0 / 32.0, //
            -1.0 / 16.0,
            11.0 / 32.0,
            145.0 / 128.0,
        ];
        let (m, _) = SymmetricMatrix::from_row_major(3, data.iter().map(|v| v * sp).collect()).unwrap();
        let dec =
            spectral::eigh(&MultiplicationMatrix::from_parts(lag(), "sqrt".into(), m, 0.0, 0.0)).unwrap();
        let r =
            rule_from_matrix(&dec, &ScalarFn::constant(1.0), &CoefficientVector::unit(&lag(), 2, 0)).unwrap();
        assert!(r.nodes.iter().all(|&x| x > 0.0));
        assert!((r.weight_sum() - 1.0).abs() < 1e-14);
        let want = [0.55439670476855346, 1.4422119017166769, 2.4483733164887590];
        for (x, w) in r.nodes.iter().zip(want) {
            assert!((x - w).abs() < 1e-13, "{x} vs {w}");
        }
        assert!((endpoint_clearance(&r, 0.0) - want[0]).abs() < 1e-13);
    }

    #[test]
    fn gaussian_exactness() {
        for n in [1usize, 4, 9, 19] {
            let r = gauss(n);
            for k in 0..=(2 * n as u32 + 1) {
                let got = r.integrate(|x| x.powi(k as i32)).unwrap();
                let want = factorial(k);
                assert!(((got - want) / want).abs() <= 1e-8, "n={n} k={k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn gaussian_inequality_for_even_monomials() {
        for n in 0..=20 {
            let r = gauss(n);
            for m in 0..=10 {
                let got = r.integrate(|x| x.powi(2 * m)).unwrap();
                let exact = factorial(2 * m as u32);
                assert!(got <= exact * (1.0 + 1e-6), "n={n} m={m}: {got} > {exact}");
            }
        }
    }

    #[test]
    fn basic_equals_matrix_function_entry() {
        let g = named("sqrt").unwrap();
        let m = opmatrix::build_matrix(&lag(), &g, 8, 1e-10).unwrap();
        let dec = spectral::eigh(&m).unwrap();
        let f = |x: f64| (x * x).sin();
        let a = basic_rule(&dec).integrate(f).unwrap();
        let b = dec.entry_of_function(f, 0, 0).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn integrate_basic_examples() {
        let one = ScalarFn::constant(1.0);
        let id = ScalarFn::identity();
        assert!((integrate_basic(&lag(), &id, &one, 7, TOL).unwrap() - 1.0).abs() < 1e-13);
        // sin(√x) through g = x²: F(λ) = sin(λ^{1/4})
        let g4 = named("square").unwrap();
        let f = resolve("sin(x^0.25)").unwrap();
        let got = integrate_basic(&lag(), &g4, &f, 30, 1e-10).unwrap();
        // value of [F(M_30[x²])]_00 from exact elements and a 50-digit eigensolver
        assert!((got - 0.69384909930078446).abs() < 1e-8, "{got}");
    }

    #[test]
    fn small_order_oracles_for_sin_sqrt() {
        let got =
            integrate_basic(&lag(), &named("sqrt").unwrap(), &resolve("sin(x)").unwrap(), 10, 1e-12).unwrap();
        assert!((got - 0.69016191407005568).abs() < 1e-9, "{got}");
        let got =
            integrate_basic(&lag(), &named("x15").unwrap(), &resolve("sin(x^(1/3))").unwrap(), 10, 1e-12)
                .unwrap();
        assert!((got - 0.69829799837296312).abs() < 1e-9, "{got}");
    }

    #[test]
    fn bilinear_examples() {
        let g = named("sqrt").unwrap();
        let id = ScalarFn::identity();
        let e0 = CoefficientVector::unit(&lag(), 4, 0);
        let e1 = CoefficientVector::unit(&lag(), 4, 1);
        let f = resolve("exp(-x)").unwrap();
        let a = integrate_bilinear(&lag(), &g, &f, &e0, &e0, 4, TOL).unwrap();
        let b = integrate_basic(&lag(), &g, &f, 4, TOL).unwrap();
        assert!((a - b).abs() < 1e-14);
        let m01 = integrate_bilinear(&lag(), &g, &id, &e0, &e1, 4, TOL).unwrap();
        assert!((m01 - PI.sqrt() / 4.0).abs() < 1e-11);
        let e1 = CoefficientVector::unit(&lag(), 3, 1);
        let v = integrate_bilinear(&lag(), &id, &id, &e1, &e1, 3, TOL).unwrap();
        assert!((v - 3.0).abs() < 1e-13);
    }

    #[test]
    fn product_examples() {
        let id = ScalarFn::identity();
        let one = ScalarFn::constant(1.0);
        let v = integrate_product(&lag(), &id, &id, &id, &id, 1, TOL).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let g = named("sqrt").unwrap();
        let f = resolve("cos(x)").unwrap();
        let p = integrate_product(&lag(), &g, &id, &f, &one, 6, TOL).unwrap();
        let b = integrate_basic(&lag(), &g, &f, 6, TOL).unwrap();
        assert!((p - b).abs() < 1e-13);
        let sq = named("square").unwrap();
        let root = named("sqrt").unwrap();
        // √M · √M = M, so this is [M_20[x²]]_00 = ∫x² e^{-x} dx
        let v = integrate_product(&lag(), &sq, &sq, &root, &root, 20, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn reweighted_with_unit_weighting_is_basic() {
        let g = named("sqrt").unwrap();
        let f = resolve("exp(x)/(1+x^4)").unwrap();
        let one = ScalarFn::constant(1.0);
        let a = integrate_reweighted(&lag(), &g, &f, &one, 12, TOL).unwrap();
        let b = integrate_basic(&lag(), &g, &f, 12, TOL).unwrap();
        assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn reweighted_f2_h2_identity() {
        let id = ScalarFn::identity();
        let v = integrate_reweighted(&lag(), &id, &named("f2").unwrap(), &named("h2").unwrap(), 30, 1e-10)
            .unwrap();
        // oracle from exact elements at 50 digits; the distance to π/2 is
        // truncation error of the method at this order
        assert!((v - 1.5627820281318465).abs() < 1e-8, "{v}");
    }

    #[test]
    fn reweighted_f2_h2_sqrt() {
        let g = named("sqrt").unwrap();
        let f = resolve("exp(x^2)/(1+x^4)").unwrap();
        let h = resolve("exp(x^2/2)/(1+x^4)^(3/8)").unwrap();
        let v = integrate_reweighted(&lag(), &g, &f, &h, 40, 1e-10).unwrap();
        assert!((v - 1.5647390558934371).abs() < 1e-7, "{v}");
    }

    #[test]
    fn reweighted_weights_are_nonnegative() {
        let g = named("x15").unwrap();
        let h = resolve("exp(x^(2/3)/2)/(1+x^(4/3))^(3/8)").unwrap();
        let dec = spectral::eigh(&opmatrix::build_matrix(&lag(), &g, 15, 1e-10).unwrap()).unwrap();
        let v = opmatrix::fourier_coeffs(&lag(), &h.compose(&g), 15, 1e-10).unwrap();
        let r = rule_from_matrix(&dec, &h, &v).unwrap();
        assert!(r.weights.iter().all(|&w| w >= -1e-14));
    }

    #[test]
    fn zero_weighting_is_rejected() {
        let dec = spectral::eigh(&lag().jacobi_matrix(3)).unwrap();
        let h = ScalarFn::constant(0.0);
        let err = rule_from_matrix(&dec, &h, &CoefficientVector::unit(&lag(), 3, 0)).unwrap_err();
        assert!(matches!(err, Error::ZeroWeightingAtNode { index: 0, .. }));
    }

    #[test]
    fn clearance_and_guard() {
        let r = gauss(5);
        assert!(endpoint_clearance(&r, 0.0) > 0.0);
        assert_eq!(endpoint_clearance(&r, r.nodes[2]), 0.0);
        let err = check_clearance(&r, r.nodes[0], 1e-8).unwrap_err();
        assert!(matches!(err, Error::NodeTooCloseToSingularity { .. }));
        assert!(check_exponent(1.5).is_err());
        assert!(check_exponent(-0.1).is_err());
    }

    #[test]
    fn improper_examples() {
        let id = ScalarFn::identity();
        let one = ScalarFn::constant(1.0);
        let v = integrate_improper(&lag(), &id, &one, 0.0, 0.0, 10, TOL, None).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
        let f = resolve("1/(1+x)").unwrap();
        let v = integrate_improper(&lag(), &id, &f, -1.0, 1.0, 25, TOL, None).unwrap();
        // e E₁(1)
        assert!((v - 0.5963473623231940).abs() < 1e-3, "{v}");
        let inv_sqrt = resolve("x^(-1/2)").unwrap();
        let v = integrate_improper(&lag(), &id, &inv_sqrt, 0.0, 0.5, 25, TOL, None).unwrap();
        assert!(v.is_finite() && v > 1.0 && v < PI.sqrt());
        let err = integrate_improper(&lag(), &id, &inv_sqrt, 0.0, 0.5, 25, TOL, Some(1.0)).unwrap_err();
        assert!(matches!(err, Error::NodeTooCloseToSingularity { .. }));
    }

    #[test]
    fn positive_nodes_for_shipped_inside_functions() {
        for name in ["sqrt", "id", "x15", "square"] {
            let m = opmatrix::build_matrix(&lag(), &named(name).unwrap(), 40, 1e-10).unwrap();
            let r = basic_rule(&spectral::eigh(&m).unwrap());
            assert!(r.nodes[0] > 0.0, "{name}: {}", r.nodes[0]);
        }
    }

    #[test]
    fn csv_and_json_output() {
        let r = gauss(1);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "node,weight");
        assert_eq!(lines.len(), 3);
        let x: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(x, r.nodes[0]);
        let back: QuadratureRule = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn weights_normalized(n in 0usize..30, family in 0usize..3) {
            let fam = [BasisFamily::laguerre(), BasisFamily::hermite(), BasisFamily::legendre()][family].clone();
            let r = basic_rule(&spectral::eigh(&fam.jacobi_matrix(n)).unwrap());
            prop_assert!((r.weight_sum() - 1.0).abs() <= 1e-12);
            prop_assert!(r.weights.iter().all(|&w| w >= -1e-14));
            prop_assert!(r.nodes.windows(2).all(|p| p[0] <= p[1]));
        }

        #[test]
        fn rule_matches_polynomial_matrix_function(n in 2usize..12, c in proptest::collection::vec(-2.0f64..2.0, 4)) {
            // p(M)_00 by matrix powers vs the spectral sum
            let m = lag().jacobi_matrix(n);
            let e = m.entries();
            let dim = n + 1;
            let mut power = vec![0.0; dim];
            power[0] = 1.0;
            let mut direct = 0.0;
            for ck in &c {
                direct += ck * power[0];
                power = e.mul_vec(&power);
            }
            let r = basic_rule(&spectral::eigh(&m).unwrap());
            let spec = r.integrate(|x| c.iter().rev().fold(0.0, |acc, ck| acc * x + ck)).unwrap();
            prop_assert!((spec - direct).abs() <= 1e-8 * (1.0 + direct.abs()));
        }
    }
}
