//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};

use opquad::functions::{named, resolve};
use opquad::opmatrix::{self, sign_report};
use opquad::quadrature::{self, basic_rule};
use opquad::spectral;
use opquad::study::{classify_trend, run_study, StudyConfig, Trend};
use opquad::{BasisFamily, ScalarFn, SymmetricMatrix};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lag() -> BasisFamily {
    BasisFamily::laguerre()
}

fn jacobi_matrix_exact() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_opquad"))
        .args(["jacobi", "--family", "laguerre", "--n", "4", "--format", "json"])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("exit status {}", out.status));
    }
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let entries: Vec<f64> =
        v["entries"].as_array().ok_or("no entries")?.iter().map(|x| x.as_f64().unwrap_or(f64::NAN)).collect();
    let mut worst = 0.0f64;
    for i in 0..5usize {
        for j in 0..5usize {
            let want = if i == j {
                (2 * i + 1) as f64
            } else if i.abs_diff(j) == 1 {
                i.max(j) as f64
            } else {
                0.0
            };
            worst = worst.max((entries[i * 5 + j] - want).abs());
        }
    }
    check(entries.len() == 25 && worst <= 1e-12, format!("max deviation {worst:.1e}"))
}

fn closed_form_matrices() -> Outcome {
    let sp = PI.sqrt();
    let m2 = [
        [1.0 / 2.0, 1.0 / 4.0, -1.0 / 16.0],
        [1.0 / 4.0, 7.0 / 8.0, 11.0 / 32.0],
        [-1.0 / 16.0, 11.0 / 32.0, 145.0 / 128.0],
    ];
    let m3 = [
        [3.0 / 4.0, 9.0 / 8.0, 9.0 / 32.0, -3.0 / 64.0],
        [9.0 / 8.0, 57.0 / 16.0, 207.0 / 64.0, 81.0 / 128.0],
        [9.0 / 32.0, 207.0 / 64.0, 1947.0 / 256.0, 3051.0 / 512.0],
        [-3.0 / 64.0, 81.0 / 128.0, 3051.0 / 512.0, 12873.0 / 1024.0],
    ];
    let a = opmatrix::build_matrix(&lag(), &named("sqrt").unwrap(), 2, 1e-12).map_err(|e| e.to_string())?;
    let b = opmatrix::build_matrix(&lag(), &named("x15").unwrap(), 3, 1e-12).map_err(|e| e.to_string())?;
    let dev = |m: &SymmetricMatrix, want: &[&[f64]]| {
        let mut worst = 0.0f64;
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                worst = worst.max((m.get(i, j) - sp * w).abs());
            }
        }
        worst
    };
    let da = dev(a.entries(), &m2.iter().map(|r| &r[..]).collect::<Vec<_>>());
    let db = dev(b.entries(), &m3.iter().map(|r| &r[..]).collect::<Vec<_>>());

    let pattern = ["+--+-+", "----+-", "----++", "+----+", "-++---", "+-++--"];
    let m5 =
        opmatrix::build_matrix(&lag(), &named("xcossqrt").unwrap(), 5, 1e-12).map_err(|e| e.to_string())?;
    let got = sign_report(&m5).rows();
    let signs_ok = got.iter().zip(pattern).all(|(g, w)| g == w);
    check(
        da <= 1e-9 && db <= 1e-9 && signs_ok,
        format!(
            "sqrt dev {da:.1e}, x^1.5 dev {db:.1e}, sign pattern {}",
            if signs_ok { "matches" } else { "differs" }
        ),
    )
}

/// Laguerre `L_N(x)` by the classical recurrence.
fn laguerre_poly(n: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, 1.0 - x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0 - x) * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Roots of `L_N` by a sign-change scan and bisection, with weights
/// `x / ((N+1)² L_{N+1}(x)²)`.
fn root_finding_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let upper = 4.0 * n as f64 + 10.0;
    let step = 1e-3;
    let mut nodes = Vec::new();
    let mut a = 0.0;
    let mut fa = laguerre_poly(n, a);
    while a < upper && nodes.len() < n {
        let b = a + step;
        let fb = laguerre_poly(n, b);
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let fm = laguerre_poly(n, mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            nodes.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    let np1 = (n + 1) as f64;
    let weights = nodes.iter().map(|&x| x / (np1 * np1 * laguerre_poly(n + 1, x).powi(2))).collect();
    (nodes, weights)
}

fn gauss_laguerre_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for points in [2usize, 5, 10, 20] {
        let rule = basic_rule(&spectral::eigh(&lag().jacobi_matrix(points - 1)).map_err(|e| e.to_string())?);
        let (nodes, weights) = root_finding_rule(points);
        if nodes.len() != points {
            return Err(format!("oracle found {} roots for {points} points", nodes.len()));
        }
        for j in 0..points {
            worst = worst.max((rule.nodes[j] - nodes[j]).abs());
            worst = worst.max((rule.weights[j] - weights[j]).abs());
        }
    }
    let two = basic_rule(&spectral::eigh(&lag().jacobi_matrix(1)).map_err(|e| e.to_string())?);
    let s = 2f64.sqrt();
    let two_dev = [
        two.nodes[0] - (2.0 - s),
        two.nodes[1] - (2.0 + s),
        two.weights[0] - (2.0 + s) / 4.0,
        two.weights[1] - (2.0 - s) / 4.0,
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs()));
    check(
        worst <= 1e-10 && two_dev <= 1e-14,
        format!("max node/weight deviation {worst:.1e}, two-point deviation {two_dev:.1e}"),
    )
}

fn gaussian_inequality() -> Outcome {
    let mut worst_ratio = 0.0f64;
    for n in 0..=20 {
        let rule = basic_rule(&spectral::eigh(&lag().jacobi_matrix(n)).map_err(|e| e.to_string())?);
        for m in 0..=10i32 {
            let exact: f64 = (1..=2 * m).map(f64::from).product();
            let got = rule.integrate(|x| x.powi(2 * m)).map_err(|e| e.to_string())?;
            worst_ratio = worst_ratio.max(got / exact);
        }
    }
    check(worst_ratio <= 1.0 + 1e-6, format!("max rule/exact ratio over even monomials {worst_ratio:.12}"))
}

fn study(preset: &str) -> Result<opquad::StudyReport, String> {
    run_study(&StudyConfig::preset(preset).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn trend_text(r: &opquad::StudyReport, g: &str) -> String {
    r.trend(g).map(|t| t.to_string()).unwrap_or_else(|| "undetermined".into())
}

fn final_error(r: &opquad::StudyReport, g: &str) -> f64 {
    r.rows_for(g).last().and_then(|row| row.abs_error).unwrap_or(f64::NAN)
}

fn first_error(r: &opquad::StudyReport, g: &str) -> f64 {
    r.rows_for(g).next().and_then(|row| row.abs_error).unwrap_or(f64::NAN)
}

fn bounded_outside_sweep() -> Outcome {
    let r = study("appendix-b-f1-h1")?;
    let analytic = PI.sqrt() / 2.0 * (-0.25f64).exp();
    let reference = r.rows[0].reference;
    let all = ["sqrt", "id", "x15", "square"];
    let converging = all.iter().all(|g| r.trend(g) == Some(Trend::Converging));
    let id_final = final_error(&r, "id");
    let trends: Vec<String> = all.iter().map(|g| format!("{g}={}", trend_text(&r, g))).collect();
    check(
        converging && id_final < 1e-5 && (reference - analytic).abs() < 1e-10,
        format!("trends {}; id error at n=30 {id_final:.2e}; reference {reference:.10}", trends.join(" ")),
    )
}

fn growing_outside_sweep() -> Outcome {
    let r = study("appendix-b-f2-h1")?;
    let reference = r.rows[0].reference;
    let conv = ["id", "square"].iter().all(|g| r.trend(g) == Some(Trend::Converging));
    let mut div = true;
    let mut growth = Vec::new();
    for g in ["sqrt", "x15"] {
        let ratio = r.error_at(g, 20).unwrap_or(f64::NAN) / r.error_at(g, 8).unwrap_or(f64::NAN);
        div &= r.trend(g) == Some(Trend::Diverging) && ratio >= 10.0;
        growth.push(format!("{g} err20/err8={ratio:.1e}"));
    }
    let trends: Vec<String> =
        ["sqrt", "id", "x15", "square"].iter().map(|g| format!("{g}={}", trend_text(&r, g))).collect();
    check(
        conv && div && (reference - PI / 2.0).abs() < 1e-9,
        format!("trends {}; {}; reference {reference:.10}", trends.join(" "), growth.join(", ")),
    )
}

fn reweighted_sweep() -> Outcome {
    let r = study("appendix-b-f2-h2")?;
    let mut ok = true;
    let mut detail = Vec::new();
    for g in ["sqrt", "x15"] {
        let (first, last) = (first_error(&r, g), final_error(&r, g));
        ok &= r.trend(g) == Some(Trend::Converging) && last <= 0.1 * first;
        detail.push(format!("{g}={} (final/initial {:.3})", trend_text(&r, g), last / first));
    }
    check(ok, detail.join(", "))
}

fn endpoint_positivity() -> Outcome {
    let mut smallest = f64::INFINITY;
    // x cos √x is left out: it changes sign, so 0 is not an endpoint of its range
    for g in ["sqrt", "id", "x15", "square"] {
        let m = opmatrix::build_matrix(&lag(), &named(g).unwrap(), 40, 1e-10).map_err(|e| e.to_string())?;
        for n in 0..=40 {
            let dec = spectral::eigh(&m.leading(n)).map_err(|e| e.to_string())?;
            smallest = smallest.min(dec.eigenvalues()[0]);
        }
    }
    check(smallest > 0.0, format!("smallest node over all g and n ≤ 40: {smallest:.3e}"))
}

fn improper_integral() -> Outcome {
    let id = ScalarFn::identity();
    let f = resolve("x^(-1/2)").unwrap();
    let mut errors = Vec::new();
    for n in [5usize, 10, 15, 20, 25] {
        let v = quadrature::integrate_improper(&lag(), &id, &f, 0.0, 0.5, n, 1e-10, None)
            .map_err(|e| e.to_string())?;
        errors.push((v - PI.sqrt()).abs());
    }
    let trend = classify_trend(&errors).map_err(|e| e.to_string())?;
    let last = errors[4];
    check(
        last <= 1e-2 && trend == Trend::Converging,
        format!(
            "errors {} ({trend}); n=25 error {last:.3e}",
            errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn property_suite() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let mut norm = 0.0f64;
    for fam in [BasisFamily::laguerre(), BasisFamily::hermite(), BasisFamily::legendre()] {
        for n in 0..=40 {
            let r = basic_rule(&spectral::eigh(&fam.jacobi_matrix(n)).map_err(|e| e.to_string())?);
            norm = norm.max((r.weight_sum() - 1.0).abs());
        }
    }
    ok &= norm <= 1e-12;
    notes.push(format!("weight sum {norm:.1e}"));

    let mut resid = 0.0f64;
    for g in ["sqrt", "id", "x15", "square", "xcossqrt"] {
        let m = opmatrix::build_matrix(&lag(), &named(g).unwrap(), 30, 1e-10).map_err(|e| e.to_string())?;
        let dec = spectral::eigh(&m).map_err(|e| e.to_string())?;
        let scale = 1.0 + dec.eigenvalues().iter().fold(0.0f64, |a, l| a.max(l.abs()));
        resid = resid.max(dec.max_residual() / scale);
    }
    ok &= resid <= 1e-10;
    notes.push(format!("scaled residual {resid:.1e}"));

    let coeffs = [0.5, -1.25, 0.75, 0.125];
    let mut poly = 0.0f64;
    for n in 1..=8 {
        let m =
            opmatrix::build_matrix(&lag(), &named("sqrt").unwrap(), n, 1e-10).map_err(|e| e.to_string())?;
        let dec = spectral::eigh(&m).map_err(|e| e.to_string())?;
        let got = dec
            .apply_function(|x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c))
            .map_err(|e| e.to_string())?;
        // Horner with explicit matrix products
        let e = m.entries();
        let dim = n + 1;
        let mut acc = SymmetricMatrix::identity(dim).scale(coeffs[3]);
        for &c in coeffs[..3].iter().rev() {
            let prod = acc.matmul(e);
            let mut next = vec![0.0; dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    next[i * dim + j] = prod[i * dim + j] + if i == j { c } else { 0.0 };
                }
            }
            acc = SymmetricMatrix::from_row_major(dim, next).map_err(|e| e.to_string())?.0;
        }
        poly = poly.max(got.max_abs_diff(&acc));
    }
    ok &= poly <= 1e-8;
    notes.push(format!("polynomial oracle {poly:.1e}"));

    let mut constant = 0.0f64;
    for c in [-3.5, 0.25, 7.0] {
        let m =
            opmatrix::build_matrix(&lag(), &ScalarFn::constant(c), 12, 1e-12).map_err(|e| e.to_string())?;
        constant = constant.max(m.entries().max_abs_diff(&SymmetricMatrix::identity(13).scale(c)));
    }
    ok &= constant <= 1e-12;
    notes.push(format!("constant g {constant:.1e}"));

    let one = ScalarFn::constant(1.0);
    let mut rew = 0.0f64;
    for (g, f) in [("sqrt", "exp(x)/(1+x^4)"), ("id", "sin(x)"), ("square", "sqrt(x)")] {
        let (g, f) = (named(g).unwrap(), resolve(f).unwrap());
        let a =
            quadrature::integrate_reweighted(&lag(), &g, &f, &one, 16, 1e-10).map_err(|e| e.to_string())?;
        let b = quadrature::integrate_basic(&lag(), &g, &f, 16, 1e-10).map_err(|e| e.to_string())?;
        rew = rew.max((a - b).abs());
    }
    ok &= rew <= 1e-14;
    notes.push(format!("reweighted h=1 vs basic {rew:.1e}"));

    check(ok, notes.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("laguerre jacobi matrix from the command line", jacobi_matrix_exact),
        ("closed-form matrices and sign pattern", closed_form_matrices),
        ("gauss-laguerre rule vs root-finding oracle", gauss_laguerre_equivalence),
        ("even-moment inequality", gaussian_inequality),
        ("sin(sqrt x) sweep converges", bounded_outside_sweep),
        ("exp(x)/(1+x^2) sweep trends", growing_outside_sweep),
        ("reweighted sweep converges for sqrt and x^1.5", reweighted_sweep),
        ("nodes stay clear of the endpoint", endpoint_positivity),
        ("x^(-1/2) improper integral", improper_integral),
        ("property suite", property_suite),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
