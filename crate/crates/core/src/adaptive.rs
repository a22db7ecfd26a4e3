//! Adaptive Gauss–Kronrod (7, 15) integration over a possibly infinite
//! interval.
//!
//! Infinite intervals are compactified onto a finite parameter range:
//! `[a, ∞)` uses `x = a + t/(1 - t)`, `(-∞, b]` uses `x = b - t/(1 - t)` and
//! `ℝ` uses `x = t/(1 - t²)`. The integrand is never evaluated at the ends of
//! the parameter range, which also makes integrable endpoint singularities
//! such as `x^{-1/2}` at `0` tractable by bisection.
//!
//! The vector form integrates several components over one shared
//! subdivision, which is how whole matrices are computed in one pass.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::basis::Domain;
use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd Kronrod abscissae `XGK[1], XGK[3], XGK[5], XGK[7]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Initial uniform partition of the parameter range.
const INITIAL_PIECES: usize = 8;
/// Subdivision cap.
pub const MAX_INTERVALS: usize = 4000;
/// Relative tolerance floor; Kronrod error estimates are roundoff-limited below it.
const ROUNDOFF_FLOOR: f64 = 100.0 * f64::EPSILON;

/// Integral estimate of one component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Sum of the per-interval `|Kronrod - Gauss|` differences.
    pub error: f64,
    /// Estimate of `∫|f|`, the scale the relative tolerance refers to.
    pub magnitude: f64,
}

impl Estimate {
    fn allowed(&self, rel_tol: f64) -> f64 {
        rel_tol.max(ROUNDOFF_FLOOR) * self.magnitude
    }
}

/// Result of a vector integration. `converged` is false when the
/// subdivision cap was hit or the integrand produced non-finite values.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub estimates: Vec<Estimate>,
    pub converged: bool,
    pub intervals: usize,
}

impl Outcome {
    /// Index and error-to-allowance ratio of the worst component.
    pub fn worst(&self, rel_tol: f64) -> Option<(usize, f64)> {
        self.estimates
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let allowed = e.allowed(rel_tol);
                let ratio = if e.error == 0.0 {
                    0.0
                } else if allowed == 0.0 || !e.error.is_finite() {
                    f64::INFINITY
                } else {
                    e.error / allowed
                };
                (k, ratio)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

#[derive(Clone, Copy)]
enum Map {
    Finite { lower: f64, width: f64 },
    Upper { lower: f64 },
    Lower { upper: f64 },
    Whole,
}

impl Map {
    fn new(domain: Domain) -> (Self, f64, f64) {
        match (domain.lower.is_finite(), domain.upper.is_finite()) {
            (true, true) => {
                (Map::Finite { lower: domain.lower, width: domain.upper - domain.lower }, 0.0, 1.0)
            }
            (true, false) => (Map::Upper { lower: domain.lower }, 0.0, 1.0),
            (false, true) => (Map::Lower { upper: domain.upper }, 0.0, 1.0),
            (false, false) => (Map::Whole, -1.0, 1.0),
        }
    }

    /// `(x(t), dx/dt)`.
    #[inline]
    fn apply(self, t: f64) -> (f64, f64) {
        match self {
            Map::Finite { lower, width } => (lower + width * t, width),
            Map::Upper { lower } => {
                let s = 1.0 - t;
                (lower + t / s, 1.0 / (s * s))
            }
            Map::Lower { upper } => {
                let s = 1.0 - t;
                (upper - t / s, 1.0 / (s * s))
            }
            Map::Whole => {
                let s = 1.0 - t * t;
                (t / s, (1.0 + t * t) / (s * s))
            }
        }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
    magnitude: Vec<f64>,
    priority: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.priority == other.priority
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

struct Kronrod<'f, F> {
    map: Map,
    dim: usize,
    f: &'f F,
    buf: Vec<f64>,
    nonfinite: bool,
}

impl<F: Fn(f64, &mut [f64])> Kronrod<'_, F> {
    fn eval(&mut self, t: f64, out: &mut [f64]) {
        let (x, jac) = self.map.apply(t);
        self.buf.iter_mut().for_each(|v| *v = 0.0);
        (self.f)(x, &mut self.buf);
        for (o, v) in out.iter_mut().zip(&self.buf) {
            let y = v * jac;
            if !y.is_finite() {
                self.nonfinite = true;
            }
            *o = y;
        }
    }

    fn rule(&mut self, a: f64, b: f64) -> Piece {
        let dim = self.dim;
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut kron = vec![0.0; dim];
        let mut gauss = vec![0.0; dim];
        let mut abs = vec![0.0; dim];
        let mut fl = vec![0.0; dim];
        let mut fr = vec![0.0; dim];

        self.eval(center, &mut fl);
        for k in 0..dim {
            kron[k] = WGK[7] * fl[k];
            gauss[k] = WG[3] * fl[k];
            abs[k] = WGK[7] * fl[k].abs();
        }
        for j in 0..7 {
            let dx = half * XGK[j];
            self.eval(center - dx, &mut fl);
            self.eval(center + dx, &mut fr);
            for k in 0..dim {
                let s = fl[k] + fr[k];
                kron[k] += WGK[j] * s;
                abs[k] += WGK[j] * (fl[k].abs() + fr[k].abs());
                if j % 2 == 1 {
                    gauss[k] += WG[j / 2] * s;
                }
            }
        }
        let mut error = vec![0.0; dim];
        for k in 0..dim {
            kron[k] *= half;
            gauss[k] *= half;
            abs[k] *= half;
            error[k] = (kron[k] - gauss[k]).abs();
        }
        Piece { a, b, value: kron, error, magnitude: abs, priority: 0.0 }
    }
}

fn priority(piece: &Piece, allowed: &[f64]) -> f64 {
    piece
        .error
        .iter()
        .zip(allowed)
        .map(|(e, a)| {
            if *e == 0.0 {
                0.0
            } else if *a > 0.0 {
                e / a
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Integrates the `dim` components written by `f(x, out)` over `domain`,
/// refining until every component satisfies
/// `error ≤ max(rel_tol, 100ε) · ∫|f_k|`.
pub fn integrate_vec<F>(domain: Domain, dim: usize, f: F, rel_tol: f64) -> Outcome
where
    F: Fn(f64, &mut [f64]),
{
    let (map, t0, t1) = Map::new(domain);
    let mut kr = Kronrod { map, dim, f: &f, buf: vec![0.0; dim], nonfinite: false };

    let mut pieces: Vec<Piece> = (0..INITIAL_PIECES)
        .map(|p| {
            let a = t0 + (t1 - t0) * p as f64 / INITIAL_PIECES as f64;
            let b = t0 + (t1 - t0) * (p + 1) as f64 / INITIAL_PIECES as f64;
            kr.rule(a, b)
        })
        .collect();

    let mut value = vec![0.0; dim];
    let mut error = vec![0.0; dim];
    let mut magnitude = vec![0.0; dim];
    for p in &pieces {
        for k in 0..dim {
            value[k] += p.value[k];
            error[k] += p.error[k];
            magnitude[k] += p.magnitude[k];
        }
    }
    let tol = rel_tol.max(ROUNDOFF_FLOOR);
    let allowed = |magnitude: &[f64]| magnitude.iter().map(|m| tol * m).collect::<Vec<f64>>();

    let mut allow = allowed(&magnitude);
    for p in pieces.iter_mut() {
        p.priority = priority(p, &allow);
    }
    let mut heap: BinaryHeap<Piece> = pieces.drain(..).collect();
    let done = |error: &[f64], allow: &[f64]| error.iter().zip(allow).all(|(e, a)| e <= a);

    let mut converged = !kr.nonfinite && done(&error, &allow);
    while !converged && !kr.nonfinite && heap.len() < MAX_INTERVALS {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = kr.rule(worst.a, mid);
        let right = kr.rule(mid, worst.b);
        for k in 0..dim {
            value[k] += left.value[k] + right.value[k] - worst.value[k];
            error[k] += left.error[k] + right.error[k] - worst.error[k];
            magnitude[k] += left.magnitude[k] + right.magnitude[k] - worst.magnitude[k];
        }
        allow = allowed(&magnitude);
        for mut piece in [left, right] {
            piece.priority = priority(&piece, &allow);
            heap.push(piece);
        }
        converged = done(&error, &allow);
    }

    // Re-sum from the leaves to shed the drift of the running totals.
    let mut estimates = vec![Estimate { value: 0.0, error: 0.0, magnitude: 0.0 }; dim];
    let intervals = heap.len();
    let mut leaves = heap.into_vec();
    leaves.sort_by(|p, q| p.a.total_cmp(&q.a));
    for p in &leaves {
        for (k, e) in estimates.iter_mut().enumerate() {
            e.value += p.value[k];
            e.error += p.error[k];
            e.magnitude += p.magnitude[k];
        }
    }
    let converged = converged
        && !kr.nonfinite
        && estimates.iter().all(|e| e.error <= e.allowed(rel_tol) && e.value.is_finite());
    Outcome { estimates, converged, intervals }
}

/// Scalar adaptive integral over `domain` to relative tolerance `rel_tol`.
pub fn integrate<F>(domain: Domain, f: F, rel_tol: f64) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    let out = integrate_vec(domain, 1, |x, v| v[0] = f(x), rel_tol);
    let est = out.estimates[0];
    if out.converged {
        Ok(est)
    } else {
        Err(Error::OracleNoConvergence(format!(
            "adaptive quadrature stopped at {} intervals with value {} and error estimate {:e}",
            out.intervals, est.value, est.error
        )))
    }
}
