//! Named scalar functions and the registry used by the CLI and studies.
//!
//! | name       | function                       | inverse on `[0, ∞)` |
//! |------------|--------------------------------|---------------------|
//! | `sqrt`     | `√x`                           | `λ²`                |
//! | `id`       | `x`                            | `λ`                 |
//! | `x15`      | `x^{3/2}`                      | `λ^{2/3}`           |
//! | `square`   | `x²`                           | `√λ`                |
//! | `xcossqrt` | `x cos √x`                     | none                |
//! | `f1`       | `sin √x`                       |                     |
//! | `f2`       | `eˣ / (1 + x²)`                |                     |
//! | `h1`       | `1`                            |                     |
//! | `h2`       | `e^{x/2} / (1 + x²)^{3/8}`     |                     |
//!
//! `g1`…`g4` are aliases for `sqrt`, `id`, `x15`, `square`. Anything else is
//! parsed as an expression in `x`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr;

type Func = dyn Fn(f64) -> f64 + Send + Sync;
type ScaledFunc = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A real function of one variable with a label for provenance.
///
/// Functions that grow exponentially may carry a scaled form computing
/// `f(x) e^s` without forming `f(x)`, so that products with a decaying
/// weight stay finite after `f(x)` alone would overflow.
#[derive(Clone)]
pub struct ScalarFn {
    label: String,
    func: Arc<Func>,
    scaled: Option<Arc<ScaledFunc>>,
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({})", self.label)
    }
}

impl ScalarFn {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), func: Arc::new(f), scaled: None }
    }

    /// Attaches `(x, s) ↦ f(x) e^s`.
    pub fn with_scaled(mut self, scaled: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.scaled = Some(Arc::new(scaled));
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_| c)
    }

    pub fn identity() -> Self {
        Self::new("id", |x| x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.func)(x)
    }

    /// `f(x) e^s`, through the scaled form when there is one.
    #[inline]
    pub fn eval_scaled(&self, x: f64, s: f64) -> f64 {
        match &self.scaled {
            Some(g) => g(x, s),
            None => (self.func)(x) * s.exp(),
        }
    }

    /// `x ↦ self(inner(x))`.
    pub fn compose(&self, inner: &ScalarFn) -> ScalarFn {
        let (outer, inner_f) = (Arc::clone(&self.func), Arc::clone(&inner.func));
        let scaled = self.scaled.as_ref().map(|outer_s| {
            let (outer_s, inner_f) = (Arc::clone(outer_s), Arc::clone(&inner.func));
            Arc::new(move |x, s| outer_s(inner_f(x), s)) as Arc<ScaledFunc>
        });
        Self {
            label: format!("{}∘{}", self.label, inner.label),
            func: Arc::new(move |x| outer(inner_f(x))),
            scaled,
        }
    }

    /// Linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &ScalarFn, b: f64) -> ScalarFn {
        let (f, g) = (Arc::clone(&self.func), Arc::clone(&other.func));
        let (fs, gs) = (self.clone(), other.clone());
        Self {
            label: format!("{a}*{} + {b}*{}", self.label, other.label),
            func: Arc::new(move |x| a * f(x) + b * g(x)),
            scaled: Some(Arc::new(move |x, s| a * fs.eval_scaled(x, s) + b * gs.eval_scaled(x, s))),
        }
    }
}

/// An inside function with its inverse, when it is strictly monotone on the
/// domain.
#[derive(Debug, Clone)]
pub struct InsideFunction {
    pub g: ScalarFn,
    pub inverse: Option<ScalarFn>,
}

fn canonical(name: &str) -> &str {
    match name {
        "g1" => "sqrt",
        "g2" => "id",
        "g3" => "x15",
        "g4" => "square",
        other => other,
    }
}

fn registered(name: &str) -> Option<ScalarFn> {
    let f = match canonical(name) {
        "sqrt" => ScalarFn::new("sqrt", f64::sqrt),
        "id" => ScalarFn::identity(),
        "x15" => ScalarFn::new("x15", |x: f64| x * x.sqrt()),
        "square" => ScalarFn::new("square", |x| x * x),
        "xcossqrt" => ScalarFn::new("xcossqrt", |x: f64| x * x.sqrt().cos()),
        "f1" => ScalarFn::new("f1", |x: f64| x.sqrt().sin()),
        "f2" => ScalarFn::new("f2", |x: f64| x.exp() / (1.0 + x * x))
            .with_scaled(|x, s| (x + s).exp() / (1.0 + x * x)),
        "h1" => ScalarFn::new("h1", |_| 1.0),
        "h2" => ScalarFn::new("h2", |x: f64| (0.5 * x).exp() / (1.0 + x * x).powf(0.375))
            .with_scaled(|x, s| (0.5 * x + s).exp() / (1.0 + x * x).powf(0.375)),
        _ => return None,
    };
    Some(f)
}

fn registered_inverse(name: &str) -> Option<ScalarFn> {
    let f = match canonical(name) {
        "sqrt" => ScalarFn::new("sqrt^-1", |l| l * l),
        "id" => ScalarFn::identity(),
        "x15" => ScalarFn::new("x15^-1", |l: f64| l.powf(2.0 / 3.0)),
        "square" => ScalarFn::new("square^-1", f64::sqrt),
        _ => return None,
    };
    Some(f)
}

/// Names known to the registry.
pub const REGISTRY: [&str; 9] = ["sqrt", "id", "x15", "square", "xcossqrt", "f1", "f2", "h1", "h2"];

/// Registry name or expression in `x`.
pub fn resolve(spec: &str) -> Result<ScalarFn> {
    let spec = spec.trim();
    if let Some(f) = registered(spec) {
        return Ok(f);
    }
    let e = expr::parse(spec)?;
    Ok(ScalarFn::new(spec, move |x| e.eval(x)))
}

/// Inside function by name or expression; registry entries carry their
/// inverse.
pub fn inside(spec: &str) -> Result<InsideFunction> {
    let g = resolve(spec)?;
    Ok(InsideFunction { g, inverse: registered_inverse(spec.trim()) })
}

/// Registry-only lookup.
pub fn named(name: &str) -> Result<ScalarFn> {
    registered(name.trim()).ok_or_else(|| Error::UnknownFunction(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn registry_values() {
        assert_relative_eq!(named("x15").unwrap().eval(4.0), 8.0);
        assert_relative_eq!(named("f2").unwrap().eval(0.0), 1.0);
        assert_relative_eq!(named("h2").unwrap().eval(0.0), 1.0);
        assert_eq!(named("h1").unwrap().eval(123.0), 1.0);
        assert!(matches!(named("nope"), Err(Error::UnknownFunction(_))));
        for name in REGISTRY {
            assert!(named(name).unwrap().eval(1.0).is_finite());
        }
    }

    #[test]
    fn inverses_round_trip() {
        for name in ["sqrt", "id", "x15", "square", "g1", "g3"] {
            let f = inside(name).unwrap();
            let inv = f.inverse.unwrap();
            for &x in &[0.0, 0.25, 1.0, 7.5, 40.0] {
                assert_relative_eq!(inv.eval(f.g.eval(x)), x, max_relative = 1e-14, epsilon = 1e-300);
            }
        }
        assert!(inside("xcossqrt").unwrap().inverse.is_none());
        assert!(inside("x^3").unwrap().inverse.is_none());
    }

    #[test]
    fn composition_with_inverse_recovers_outside_function() {
        let f2 = named("f2").unwrap();
        let g = inside("sqrt").unwrap();
        let composed = f2.compose(g.inverse.as_ref().unwrap());
        // F(g(x)) = f2(x)
        for &x in &[0.5, 2.0, 9.0] {
            assert_relative_eq!(composed.eval(g.g.eval(x)), f2.eval(x), max_relative = 1e-14);
        }
    }

    #[test]
    fn scaled_forms_survive_overflow() {
        let f2 = named("f2").unwrap();
        let x = 800.0;
        assert!(f2.eval(x).is_infinite());
        assert_relative_eq!(f2.eval_scaled(x, -x), 1.0 / (1.0 + x * x), max_relative = 1e-12);
        assert_relative_eq!(f2.eval_scaled(2.0, -1.0), f2.eval(2.0) / 1f64.exp(), max_relative = 1e-14);
        let composed = f2.compose(&named("sqrt").unwrap());
        assert_relative_eq!(composed.eval_scaled(900.0, -30.0), 1.0 / 901.0, max_relative = 1e-12);
        let plain = resolve("x^2").unwrap();
        assert_relative_eq!(plain.eval_scaled(3.0, -1.0), 9.0 / 1f64.exp(), max_relative = 1e-15);
    }

    #[test]
    fn expressions_fall_through() {
        let f = resolve("exp(x)/(1+x^2)").unwrap();
        assert_relative_eq!(f.eval(2.0), named("f2").unwrap().eval(2.0), max_relative = 1e-15);
        assert_eq!(resolve("1").unwrap().eval(5.0), 1.0);
        assert!(resolve("bogus(x)").is_err());
    }
}
