//! Orthonormal polynomial bases of `L²_w(Ω)`.
//!
//! Each family is described by its normalized weight `w` (with `∫_Ω w = 1`)
//! and the monic three-term recurrence
//!
//! ```text
//! p_{k+1}(x) = (x - α_k) p_k(x) - β_k p_{k-1}(x),   p_0 = 1, p_{-1} = 0.
//! ```
//!
//! The orthonormal functions `φ_k = p_k / ‖p_k‖` satisfy
//! `b_{k+1} φ_{k+1} = (x - α_k) φ_k - b_k φ_{k-1}` with `b_k = √β_k`, and the
//! symmetric tridiagonal matrix with diagonal `α_k` and off-diagonal `b_k` is
//! the multiplication matrix `M_n[id]`. All `φ_k` have positive leading
//! coefficient, so the off-diagonal is positive.
//!
//! Forward evaluation is unscaled; orders up to 64 are supported.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;
use crate::opmatrix::MultiplicationMatrix;

/// Largest order for which forward evaluation is documented to be reliable.
pub const MAX_SUPPORTED_ORDER: usize = 64;

type RecurrenceFn = dyn Fn(usize) -> (f64, f64) + Send + Sync;
type WeightFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Real interval, endpoints may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
}

impl Domain {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidArgument(format!("invalid domain [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

#[derive(Clone)]
enum Kind {
    Laguerre,
    Hermite,
    Legendre,
    Custom { recurrence: Arc<RecurrenceFn>, weight: Arc<WeightFn> },
}

/// An orthonormal basis `1 = φ₀, φ₁, …` for a normalized weight.
#[derive(Clone)]
pub struct BasisFamily {
    name: String,
    domain: Domain,
    kind: Kind,
}

impl fmt::Debug for BasisFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BasisFamily").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

impl PartialEq for BasisFamily {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (Kind::Custom { .. }, _) | (_, Kind::Custom { .. }) => false,
            _ => self.name == other.name,
        }
    }
}

impl BasisFamily {
    /// Orthonormal Laguerre polynomials, `w(x) = e^{-x}` on `[0, ∞)`.
    pub fn laguerre() -> Self {
        Self {
            name: "laguerre".into(),
            domain: Domain { lower: 0.0, upper: f64::INFINITY },
            kind: Kind::Laguerre,
        }
    }

    /// Orthonormal Hermite polynomials, `w(x) = e^{-x²}/√π` on `ℝ`.
    pub fn hermite() -> Self {
        Self {
            name: "hermite".into(),
            domain: Domain { lower: f64::NEG_INFINITY, upper: f64::INFINITY },
            kind: Kind::Hermite,
        }
    }

    /// Orthonormal Legendre polynomials, `w(x) = 1/2` on `[-1, 1]`.
    pub fn legendre() -> Self {
        Self { name: "legendre".into(), domain: Domain { lower: -1.0, upper: 1.0 }, kind: Kind::Legendre }
    }

    /// A family given by its own monic recurrence `k ↦ (α_k, β_k)` and
    /// weight. The weight must integrate to one over `domain` and `β_k`
    /// must be positive for `k ≥ 1`; neither is checked.
    pub fn custom<R, W>(name: impl Into<String>, domain: Domain, weight: W, recurrence: R) -> Self
    where
        R: Fn(usize) -> (f64, f64) + Send + Sync + 'static,
        W: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            domain,
            kind: Kind::Custom { recurrence: Arc::new(recurrence), weight: Arc::new(weight) },
        }
    }

    /// Looks up a classical family by case-insensitive name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "laguerre" => Ok(Self::laguerre()),
            "hermite" => Ok(Self::hermite()),
            "legendre" => Ok(Self::legendre()),
            _ => Err(Error::UnsupportedFamily(name.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn is_classical(&self) -> bool {
        !matches!(self.kind, Kind::Custom { .. })
    }

    /// Normalized weight `w(x)`, zero outside the domain.
    pub fn weight(&self, x: f64) -> f64 {
        if !self.domain.contains(x) {
            return 0.0;
        }
        match &self.kind {
            Kind::Laguerre => (-x).exp(),
            Kind::Hermite => (-x * x).exp() / PI.sqrt(),
            Kind::Legendre => 0.5,
            Kind::Custom { weight, .. } => weight(x),
        }
    }

    /// `ln w(x)`, `-∞` outside the domain. Exact for the classical families
    /// where `w(x)` itself underflows.
    pub fn ln_weight(&self, x: f64) -> f64 {
        if !self.domain.contains(x) {
            return f64::NEG_INFINITY;
        }
        match &self.kind {
            Kind::Laguerre => -x,
            Kind::Hermite => -x * x - 0.5 * PI.ln(),
            Kind::Legendre => 0.5f64.ln(),
            Kind::Custom { weight, .. } => weight(x).ln(),
        }
    }

    /// Monic recurrence coefficients `(α_k, β_k)`. `β_0` is the total mass
    /// of the weight, which is one for every normalized family.
    pub fn recurrence_coeffs(&self, k: usize) -> (f64, f64) {
        let kf = k as f64;
        match &self.kind {
            Kind::Laguerre => (2.0 * kf + 1.0, if k == 0 { 1.0 } else { kf * kf }),
            Kind::Hermite => (0.0, if k == 0 { 1.0 } else { 0.5 * kf }),
            Kind::Legendre => (0.0, if k == 0 { 1.0 } else { kf * kf / (4.0 * kf * kf - 1.0) }),
            Kind::Custom { recurrence, .. } => recurrence(k),
        }
    }

    /// Orthonormal off-diagonal `b_k = √β_k` linking `φ_{k-1}` and `φ_k`, `k ≥ 1`.
    pub fn off_diagonal(&self, k: usize) -> f64 {
        assert!(k >= 1, "off-diagonal index starts at 1");
        self.recurrence_coeffs(k).1.sqrt()
    }

    /// Recurrence coefficients for `φ_0 … φ_n`, tabulated once.
    pub fn table(&self, n: usize) -> RecurrenceTable {
        let alpha = (0..=n).map(|k| self.recurrence_coeffs(k).0).collect();
        let off = (1..=n + 1).map(|k| self.off_diagonal(k)).collect();
        RecurrenceTable { alpha, off }
    }

    /// `φ_k(x)` by forward recurrence.
    pub fn eval_basis(&self, k: usize, x: f64) -> f64 {
        let mut out = vec![0.0; k + 1];
        self.table(k).eval_all(x, &mut out);
        out[k]
    }

    /// The tridiagonal matrix `M_n[id]` straight from the recurrence.
    pub fn jacobi_matrix(&self, n: usize) -> MultiplicationMatrix {
        let diag: Vec<f64> = (0..=n).map(|k| self.recurrence_coeffs(k).0).collect();
        let off: Vec<f64> = (1..=n).map(|k| self.off_diagonal(k)).collect();
        MultiplicationMatrix::from_parts(
            self.clone(),
            "id".into(),
            SymmetricMatrix::tridiagonal(&diag, &off),
            0.0,
            0.0,
        )
    }
}

/// Tabulated orthonormal recurrence for `φ_0 … φ_n`.
#[derive(Debug, Clone)]
pub struct RecurrenceTable {
    alpha: Vec<f64>,
    /// `off[k] = b_{k+1}`.
    off: Vec<f64>,
}

impl RecurrenceTable {
    /// Highest index `n` that `eval_all` can fill.
    pub fn order(&self) -> usize {
        self.alpha.len() - 1
    }

    /// `(α_0..=α_n, b_1..=b_{n+1})`.
    pub fn coefficients(&self) -> (&[f64], &[f64]) {
        (&self.alpha, &self.off)
    }

    /// Fills `out[k] = φ_k(x)` for `k < out.len()`.
    pub fn eval_all(&self, x: f64, out: &mut [f64]) {
        self.eval_all_scaled(x, 1.0, out);
    }

    /// Fills `out[k] = s·φ_k(x)`. Starting from a small `s` keeps the
    /// values representable where `φ_k(x)` alone would overflow.
    pub fn eval_all_scaled(&self, x: f64, s: f64, out: &mut [f64]) {
        let len = out.len();
        assert!(len <= self.alpha.len(), "table too short");
        if len == 0 {
            return;
        }
        out[0] = s;
        if len == 1 {
            return;
        }
        out[1] = (x - self.alpha[0]) * s / self.off[0];
        for k in 1..len - 1 {
            out[k + 1] = ((x - self.alpha[k]) * out[k] - self.off[k - 1] * out[k - 1]) / self.off[k];
        }
    }
}
