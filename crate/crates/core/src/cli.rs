//! The `opquad` command line.
//!
//! ```text
//! opquad jacobi    --family laguerre --n 4 --format json
//! opquad matrix    --family laguerre --g sqrt --n 10 --out m.json
//! opquad rule      --input m.json --format csv
//! opquad integrate --family laguerre --g id --f "1" --n 5
//! opquad study     --preset appendix-b-f2-h1 --out report.csv
//! ```
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for numerical
//! failures. Failures print one line naming the operation that failed.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::basis::BasisFamily;
use crate::error::{Error, Result};
use crate::functions::{self, ScalarFn};
use crate::opmatrix::{self, CoefficientVector, MultiplicationMatrix};
use crate::quadrature::{self, QuadratureRule};
use crate::spectral;
use crate::study::{self, NRange, StudyConfig};

#[derive(Debug, Parser)]
#[command(
    name = "opquad",
    version,
    about = "Quadrature from matrix approximations of multiplication operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the Jacobi matrix M_n[x] of a family.
    Jacobi {
        #[arg(long, default_value = "laguerre")]
        family: String,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Compute M_n[g] by numerical integration.
    Matrix {
        #[arg(long, default_value = "laguerre")]
        family: String,
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Nodes and weights from a matrix written by `matrix`.
    Rule {
        #[arg(long)]
        input: PathBuf,
        /// Weighting function of the nodes.
        #[arg(long, default_value = "1")]
        h: String,
        #[command(flatten)]
        output: Output,
    },
    /// Approximate the integral of F(g(x)) against the family weight.
    Integrate {
        #[arg(long, default_value = "laguerre")]
        family: String,
        #[arg(long)]
        g: String,
        /// Outside function of the nodes.
        #[arg(long)]
        f: String,
        /// Weighting function of the nodes.
        #[arg(long, default_value = "1")]
        h: String,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Singular endpoint; enables the node clearance guard.
        #[arg(long, requires = "p")]
        singular_at: Option<f64>,
        /// Exponent of the singularity, 0 ≤ p ≤ 1.
        #[arg(long, requires = "singular_at")]
        p: Option<f64>,
        /// Write the quadrature rule along with the value.
        #[arg(long)]
        emit_rule: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Convergence sweep against a reference integral.
    Study {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value = "laguerre")]
        family: String,
        /// Comma separated inside functions.
        #[arg(long, value_delimiter = ',')]
        g: Vec<String>,
        /// Outside function of x.
        #[arg(long)]
        f: Option<String>,
        /// Weighting function of x.
        #[arg(long, default_value = "1")]
        h: String,
        #[arg(long)]
        n_range: Option<String>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Known value of the integral, skipping the reference computation.
        #[arg(long)]
        reference: Option<f64>,
        /// Also write `g,n,log10_abs_error` to this path.
        #[arg(long)]
        plot_out: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Output {
    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn write(&self, bytes: &[u8]) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, bytes)?,
            None => io::stdout().lock().write_all(bytes)?,
        }
        Ok(())
    }
}

/// An error with the name of the operation that produced it.
struct Failure {
    op: &'static str,
    error: Error,
}

trait Context<T> {
    fn during(self, op: &'static str) -> std::result::Result<T, Failure>;
}

impl<T, E: Into<Error>> Context<T> for std::result::Result<T, E> {
    fn during(self, op: &'static str) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure { op, error: e.into() })
    }
}

type CliResult = std::result::Result<(), Failure>;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn matrix_csv(m: &MultiplicationMatrix) -> String {
    let e = m.entries();
    let mut s = String::new();
    for i in 0..e.dim() {
        let row: Vec<String> = (0..e.dim()).map(|j| num(e.get(i, j))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn emit_matrix(m: &MultiplicationMatrix, output: &Output) -> CliResult {
    let text = match output.format(Format::Json) {
        Format::Json => m.to_json().during("serialize")? + "\n",
        Format::Csv => matrix_csv(m),
    };
    output.write(text.as_bytes()).during("write")
}

fn rule_bytes(rule: &QuadratureRule, format: Format, value: Option<f64>) -> Result<Vec<u8>> {
    Ok(match format {
        Format::Csv => {
            let mut buf = Vec::new();
            rule.write_csv(&mut buf)?;
            buf
        }
        Format::Json => {
            let mut v = serde_json::to_value(rule)?;
            if let Some(value) = value {
                v["value"] = json!(value);
            }
            (serde_json::to_string_pretty(&v)? + "\n").into_bytes()
        }
    })
}

fn is_unit_weighting(h: &str) -> bool {
    matches!(h.trim(), "1" | "h1")
}

/// Rule from a decomposition, basic for `h = 1`, reweighted otherwise.
fn build_rule(
    dec: &spectral::SpectralDecomposition,
    basis: &BasisFamily,
    g: &ScalarFn,
    h_spec: &str,
    tol: f64,
) -> std::result::Result<QuadratureRule, Failure> {
    if is_unit_weighting(h_spec) {
        return Ok(quadrature::basic_rule(dec));
    }
    let h = functions::resolve(h_spec).during("parse --h")?;
    let v: CoefficientVector =
        opmatrix::fourier_coeffs(basis, &h.compose(g), dec.dim() - 1, tol).during("fourier_coeffs")?;
    quadrature::rule_from_matrix(dec, &h, &v).during("rule_from_matrix")
}

fn check_tol(tol: f64) -> CliResult {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure {
            op: "parse --tol",
            error: Error::InvalidArgument(format!("tolerance must be positive, got {tol}")),
        })
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Jacobi { family, n, output } => {
            let basis = BasisFamily::from_name(&family).during("parse --family")?;
            emit_matrix(&basis.jacobi_matrix(n), &output)
        }
        Command::Matrix { family, g, n, tol, output } => {
            check_tol(tol)?;
            let basis = BasisFamily::from_name(&family).during("parse --family")?;
            let g = functions::resolve(&g).during("parse --g")?;
            let m = opmatrix::build_matrix(&basis, &g, n, tol).during("build_matrix")?;
            emit_matrix(&m, &output)
        }
        Command::Rule { input, h, output } => {
            let text = fs::read_to_string(&input).during("read --input")?;
            let m = MultiplicationMatrix::from_json(&text).during("read --input")?;
            let g = functions::resolve(m.inside_function()).during("parse matrix g")?;
            let dec = spectral::eigh(&m).during("eigh")?;
            let rule = build_rule(&dec, m.basis(), &g, &h, m.requested_tolerance().max(1e-14))?;
            let bytes = rule_bytes(&rule, output.format(Format::Csv), None).during("serialize")?;
            output.write(&bytes).during("write")
        }
        Command::Integrate { family, g, f, h, n, tol, singular_at, p, emit_rule, output } => {
            check_tol(tol)?;
            let basis = BasisFamily::from_name(&family).during("parse --family")?;
            let g = functions::resolve(&g).during("parse --g")?;
            let f = functions::resolve(&f).during("parse --f")?;
            if let Some(p) = p {
                quadrature::check_exponent(p).during("parse --p")?;
            }
            let m = opmatrix::build_matrix(&basis, &g, n, tol).during("build_matrix")?;
            let dec = spectral::eigh(&m).during("eigh")?;
            let rule = build_rule(&dec, &basis, &g, &h, tol)?;
            if let Some(c) = singular_at {
                quadrature::check_clearance(&rule, c, quadrature::default_guard(c))
                    .during("integrate_improper")?;
            }
            let value = rule.integrate(|x| f.eval(x)).during("integrate")?;
            let format = output.format(if emit_rule { Format::Json } else { Format::Csv });
            let bytes = if emit_rule {
                rule_bytes(&rule, format, Some(value)).during("serialize")?
            } else {
                match format {
                    Format::Csv => format!("{}\n", num(value)).into_bytes(),
                    Format::Json => (serde_json::to_string_pretty(&json!({
                        "basis": basis.name(),
                        "g": g.label(),
                        "f": f.label(),
                        "h": h,
                        "n": n,
                        "value": value,
                    }))
                    .map_err(Error::from)
                    .during("serialize")?
                        + "\n")
                        .into_bytes(),
                }
            };
            output.write(&bytes).during("write")
        }
        Command::Study { preset, family, g, f, h, n_range, tol, reference, plot_out, output } => {
            check_tol(tol)?;
            let cfg = match preset {
                Some(name) => {
                    let mut cfg = StudyConfig::preset(&name).during("parse --preset")?;
                    if let Some(r) = n_range {
                        cfg.n_range = r.parse().during("parse --n-range")?;
                    }
                    if !g.is_empty() {
                        cfg.inside = g;
                    }
                    cfg.tol = tol;
                    cfg.reference = reference;
                    cfg
                }
                None => {
                    let missing = |what: &str| Failure {
                        op: "parse arguments",
                        error: Error::InvalidArgument(format!("study needs --preset or {what}")),
                    };
                    StudyConfig {
                        basis: family,
                        inside: if g.is_empty() {
                            return Err(missing("--g"));
                        } else {
                            g
                        },
                        outside: f.ok_or_else(|| missing("--f"))?,
                        weighting: h,
                        n_range: n_range
                            .ok_or_else(|| missing("--n-range"))?
                            .parse::<NRange>()
                            .during("parse --n-range")?,
                        tol,
                        reference,
                    }
                }
            };
            let report = study::run_study(&cfg).during("run_study")?;
            let bytes = match output.format(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf).during("serialize")?;
                    buf
                }
                Format::Json => (report.to_json().during("serialize")? + "\n").into_bytes(),
            };
            output.write(&bytes).during("write")?;
            if let Some(path) = plot_out {
                let file = fs::File::create(path).during("write")?;
                report.write_plot_csv(file).during("write")?;
            }
            Ok(())
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(Failure { op, error }) => {
            eprintln!("opquad: {op} failed: {error}");
            if error.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
