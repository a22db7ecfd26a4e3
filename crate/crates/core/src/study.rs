//! Convergence sweeps: approximate `∫ f(x) w dx` with `M_n[g]` over a range
//! of `n` for several inside functions and compare with an independent
//! adaptive-quadrature reference.
//!
//! The outside function `f` and weighting function `h` are given as
//! functions of `x`. The rule evaluates `F = f ∘ g⁻¹` and `H = h ∘ g⁻¹` at
//! the nodes, so every inside function must have a registered inverse.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptive;
use crate::basis::BasisFamily;
use crate::error::{Error, Result};
use crate::functions::{self, ScalarFn};
use crate::opmatrix;
use crate::quadrature;
use crate::spectral;

pub const DEFAULT_REFERENCE_TOL: f64 = 1e-10;

/// Inclusive `start..=end` with a positive stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NRange {
    pub start: usize,
    pub end: usize,
    pub step: usize,
}

impl NRange {
    pub fn new(start: usize, end: usize, step: usize) -> Result<Self> {
        if step == 0 || start > end {
            return Err(Error::InvalidArgument(format!(
                "n range {start}:{end}:{step} must be ascending with a positive stride"
            )));
        }
        Ok(Self { start, end, step })
    }

    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).step_by(self.step).collect()
    }

    pub fn last(&self) -> usize {
        *self.values().last().expect("range is non-empty")
    }
}

impl FromStr for NRange {
    type Err = Error;

    /// `A:B` or `A:B:S`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("n range `{s}` is not of the form A:B[:S]"));
        let parts: Vec<&str> = s.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(bad());
        }
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let step = if parts.len() == 3 { num(parts[2])? } else { 1 };
        NRange::new(num(parts[0])?, num(parts[1])?, step)
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub basis: String,
    pub inside: Vec<String>,
    pub outside: String,
    pub weighting: String,
    pub n_range: NRange,
    pub tol: f64,
    pub reference: Option<f64>,
}

const ALL_INSIDE: [&str; 4] = ["sqrt", "id", "x15", "square"];

/// Names accepted by [`StudyConfig::preset`].
pub const PRESETS: [&str; 4] =
    ["appendix-b-f1-h1", "appendix-b-f2-h1", "appendix-b-f2-h2", "appendix-b-f1-h2"];

impl StudyConfig {
    /// The Laguerre sweeps for `f1 = sin √x` and `f2 = eˣ/(1+x²)`.
    pub fn preset(name: &str) -> Result<Self> {
        let (outside, weighting, inside, end): (&str, &str, &[&str], usize) = match name {
            "appendix-b-f1-h1" => ("f1", "h1", &ALL_INSIDE, 30),
            "appendix-b-f2-h1" => ("f2", "h1", &ALL_INSIDE, 25),
            "appendix-b-f2-h2" => ("f2", "h2", &ALL_INSIDE, 40),
            "appendix-b-f1-h2" => ("f1", "h2", &ALL_INSIDE[..2], 30),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown preset `{other}` (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(Self {
            basis: "laguerre".into(),
            inside: inside.iter().map(|s| s.to_string()).collect(),
            outside: outside.into(),
            weighting: weighting.into(),
            n_range: NRange::new(2, end, 1)?,
            tol: 1e-10,
            reference: None,
        })
    }

    fn reweighted(&self) -> bool {
        !matches!(self.weighting.trim(), "1" | "h1")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Converging,
    Diverging,
    Stagnant,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Converging => "converging",
            Trend::Diverging => "diverging",
            Trend::Stagnant => "stagnant",
        })
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Compares the median error of the last quarter of the sweep with that of
/// the first quarter. Non-finite entries are skipped.
pub fn classify_trend(errors: &[f64]) -> Result<Trend> {
    let finite: Vec<f64> = errors.iter().copied().filter(|e| e.is_finite()).collect();
    if finite.len() < 4 {
        return Err(Error::InsufficientData { finite: finite.len(), required: 4 });
    }
    let q = (finite.len() / 4).max(1);
    let first = median(&finite[..q]);
    let last = median(&finite[finite.len() - q..]);
    let (initial, fin) = (finite[0], finite[finite.len() - 1]);
    Ok(if last < 0.1 * first && fin < initial {
        Trend::Converging
    } else if last > 10.0 * first {
        Trend::Diverging
    } else {
        Trend::Stagnant
    })
}

/// `∫ F(g(x)) w(x) dx` by adaptive quadrature, independent of any matrix.
/// The weight enters through `ln w` so that registry functions with a
/// scaled form keep their tail where `w` underflows.
pub fn reference_value(basis: &BasisFamily, g: &ScalarFn, f: &ScalarFn, tol: f64) -> Result<f64> {
    let est = adaptive::integrate(
        basis.domain(),
        |x| {
            let ln_w = basis.ln_weight(x);
            if ln_w == f64::NEG_INFINITY {
                0.0
            } else {
                f.eval_scaled(g.eval(x), ln_w)
            }
        },
        tol,
    )?;
    Ok(est.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub g: String,
    pub n: usize,
    pub approx: Option<f64>,
    pub reference: f64,
    pub abs_error: Option<f64>,
    pub rel_error: Option<f64>,
    /// `ok`, or `error: …` for a row whose evaluation failed.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub element_tolerance: f64,
    pub reference_tolerance: f64,
    pub oracle: String,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    /// `None` when fewer than four rows produced a finite error.
    pub trends: BTreeMap<String, Option<Trend>>,
    pub provenance: Provenance,
}

/// Sweep for one inside function. A failure to build the matrix at the
/// largest order marks every row as failed.
fn sweep(cfg: &StudyConfig, basis: &BasisFamily, name: &str) -> Result<Vec<StudyRow>> {
    let inside = functions::inside(name)?;
    let inverse = inside.inverse.ok_or_else(|| {
        Error::InvalidArgument(format!("inside function `{name}` has no registered inverse"))
    })?;
    let f = functions::resolve(&cfg.outside)?;
    let h = functions::resolve(&cfg.weighting)?;
    let big_f = f.compose(&inverse);
    let big_h = h.compose(&inverse);
    let reference = match cfg.reference {
        Some(r) => r,
        None => reference_value(basis, &inside.g, &big_f, DEFAULT_REFERENCE_TOL)?,
    };

    let n_max = cfg.n_range.last();
    let prepared = opmatrix::build_matrix(basis, &inside.g, n_max, cfg.tol).and_then(|m| {
        let v =
            if cfg.reweighted() { Some(opmatrix::fourier_coeffs(basis, &h, n_max, cfg.tol)?) } else { None };
        Ok((m, v))
    });

    let rows = cfg
        .n_range
        .values()
        .into_iter()
        .map(|n| {
            let approx = prepared.as_ref().map_err(|e| e.to_string()).and_then(|(m, v)| {
                let dec = spectral::eigh(&m.leading(n)).map_err(|e| e.to_string())?;
                let rule = match v {
                    Some(v) => quadrature::rule_from_matrix(&dec, &big_h, &v.truncated(n)),
                    None => Ok(quadrature::basic_rule(&dec)),
                };
                rule.and_then(|r| r.integrate(|x| big_f.eval(x))).map_err(|e| e.to_string())
            });
            match approx {
                Ok(a) => {
                    let abs = (a - reference).abs();
                    StudyRow {
                        g: name.to_string(),
                        n,
                        approx: Some(a),
                        reference,
                        abs_error: Some(abs),
                        rel_error: Some(abs / reference.abs()),
                        status: "ok".into(),
                    }
                }
                Err(e) => StudyRow {
                    g: name.to_string(),
                    n,
                    approx: None,
                    reference,
                    abs_error: None,
                    rel_error: None,
                    status: format!("error: {e}"),
                },
            }
        })
        .collect();
    Ok(rows)
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    if cfg.inside.is_empty() {
        return Err(Error::InvalidArgument("study needs at least one inside function".into()));
    }
    let basis = BasisFamily::from_name(&cfg.basis)?;
    // resolve everything up front so bad ids fail before any computation
    functions::resolve(&cfg.outside)?;
    functions::resolve(&cfg.weighting)?;
    for g in &cfg.inside {
        functions::inside(g)?;
    }

    let per_g: Vec<Result<Vec<StudyRow>>> = cfg.inside.par_iter().map(|g| sweep(cfg, &basis, g)).collect();
    let mut rows = Vec::new();
    let mut trends = BTreeMap::new();
    for (g, sweep_rows) in cfg.inside.iter().zip(per_g) {
        let sweep_rows = sweep_rows?;
        let errors: Vec<f64> = sweep_rows.iter().map(|r| r.abs_error.unwrap_or(f64::NAN)).collect();
        trends.insert(g.clone(), classify_trend(&errors).ok());
        rows.extend(sweep_rows);
    }

    Ok(StudyReport {
        config: cfg.clone(),
        rows,
        trends,
        provenance: Provenance {
            element_tolerance: cfg.tol,
            reference_tolerance: DEFAULT_REFERENCE_TOL,
            oracle: match cfg.reference {
                Some(_) => "reference value supplied in config".into(),
                None => format!(
                    "adaptive Gauss-Kronrod (15 point) of f(x) w(x) on the compactified {} domain",
                    basis.name()
                ),
            },
            rule: if cfg.reweighted() {
                format!("reweighted with h = {}", cfg.weighting)
            } else {
                "basic".into()
            },
        },
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn trend_label(t: Option<&Option<Trend>>) -> String {
    match t {
        Some(Some(t)) => t.to_string(),
        _ => "undetermined".into(),
    }
}

impl StudyReport {
    /// Rows as CSV, `g,n,approx,reference,abs_error,rel_error,status,trend`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["g", "n", "approx", "reference", "abs_error", "rel_error", "status", "trend"])?;
        for r in &self.rows {
            w.write_record([
                r.g.clone(),
                r.n.to_string(),
                fmt_opt(r.approx),
                format!("{:.16e}", r.reference),
                fmt_opt(r.abs_error),
                fmt_opt(r.rel_error),
                r.status.clone(),
                trend_label(self.trends.get(&r.g)),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// `g,n,log10_abs_error` for plotting; failed rows and exact hits are
    /// left out.
    pub fn write_plot_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["g", "n", "log10_abs_error"])?;
        for r in &self.rows {
            if let Some(e) = r.abs_error.filter(|e| *e > 0.0) {
                w.write_record([r.g.clone(), r.n.to_string(), format!("{:.16e}", e.log10())])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn rows_for<'a>(&'a self, g: &'a str) -> impl Iterator<Item = &'a StudyRow> + 'a {
        self.rows.iter().filter(move |r| r.g == g)
    }

    pub fn trend(&self, g: &str) -> Option<Trend> {
        self.trends.get(g).copied().flatten()
    }

    pub fn error_at(&self, g: &str, n: usize) -> Option<f64> {
        self.rows_for(g).find(|r| r.n == n).and_then(|r| r.abs_error)
    }
}
