//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use common::{brute_extremes, brute_gram, brute_rhs, gauss_solve, least_norm_weights};
use mzquad::approx::{quasi_interpolant, CoeffFunction};
use mzquad::basis::{error_function_phi, Basis, Family, PhiOptions};
use mzquad::harness::{
    parse_degrees, run_quad_experiment, run_weyl_experiment, ConvergenceReport, ExperimentConfig,
    FunctionSpec, GeneratorSpec,
};
use mzquad::mzfamily::{assemble, generate_uniform, Generator};
use mzquad::quadrature::dual_weights;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn identity_gram() -> Outcome {
    let b = Basis::fourier();
    let (mut entry, mut bounds) = (0.0f64, 0.0f64);
    for n in 2..=128 {
        let gram = assemble(&b, &generate_uniform(&b, n, 1.0).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let dim = gram.dim();
        let t = gram.t();
        for i in 0..dim {
            for j in 0..dim {
                let target = if i == j { 1.0 } else { 0.0 };
                entry = entry.max((t[(i, j)] - target).norm());
            }
        }
        bounds = bounds
            .max((gram.lower_bound() - 1.0).abs())
            .max((gram.upper_bound() - 1.0).abs());
    }
    check(
        entry < 1e-12 && bounds < 1e-10,
        format!("max|T-I| = {entry:.2e}, max|A-1|,|B-1| = {bounds:.2e}"),
    )
}

fn trapezoid_recovery() -> Outcome {
    let b = Basis::fourier();
    let (mut dev, mut defect) = (0.0f64, 0.0f64);
    for n in 2..=128 {
        let layer = generate_uniform(&b, n, 1.0).map_err(|e| e.to_string())?;
        let rule = dual_weights(&assemble(&b, &layer).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let inv = 1.0 / layer.len() as f64;
        for w in rule.weights() {
            dev = dev.max((w - inv).norm());
        }
        defect = defect.max(rule.exactness_defect());
    }
    check(
        dev < 1e-12 && defect < 1e-12,
        format!("max|w-1/L| = {dev:.2e}, defect = {defect:.2e}"),
    )
}

struct MatrixRun {
    label: String,
    report: ConvergenceReport,
}

fn test_matrix() -> Result<Vec<MatrixRun>, String> {
    let functions = [
        FunctionSpec::Sobolev { sigma: 1.2, eps: 0.05 },
        FunctionSpec::Analytic { a: 1.25 },
        FunctionSpec::Hat,
    ];
    let generators = [GeneratorSpec::Uniform, GeneratorSpec::Jittered, GeneratorSpec::Random];
    let mut runs = Vec::new();
    for family in Family::ALL {
        for generator in &generators {
            for function in functions {
                let config = ExperimentConfig {
                    basis: Basis::new(family),
                    generator: generator.clone(),
                    oversampling: if *generator == GeneratorSpec::Random { 3.0 } else { 2.0 },
                    degrees: Some(parse_degrees("dyadic:1..128").unwrap()),
                    function,
                    sigma: 1.2,
                    ..ExperimentConfig::default()
                };
                let report = run_quad_experiment(&config)
                    .map_err(|e| format!("{family}/{generator}/{function}: {e}"))?;
                runs.push(MatrixRun {
                    label: format!("{family}/{generator}/{function}"),
                    report,
                });
            }
        }
    }
    Ok(runs)
}

/// Applies `test` to every certified row, returning the worst value it
/// reports and the first failing row.
fn over_rows(
    runs: &[MatrixRun],
    test: impl Fn(&mzquad::harness::ConvergenceRow) -> (bool, f64),
) -> (usize, usize, f64, Option<String>) {
    let (mut rows, mut uncertified, mut worst, mut failure) = (0, 0, f64::NEG_INFINITY, None);
    for run in runs {
        for row in &run.report.rows {
            if !row.certified {
                uncertified += 1;
                continue;
            }
            rows += 1;
            let (ok, value) = test(row);
            worst = worst.max(value);
            if !ok && failure.is_none() {
                failure = Some(format!("{} n = {}", run.label, row.n));
            }
        }
    }
    (rows, uncertified, worst, failure)
}

fn matrix_outcome(
    runs: &[MatrixRun],
    name: &str,
    test: impl Fn(&mzquad::harness::ConvergenceRow) -> (bool, f64),
) -> Outcome {
    let (rows, uncertified, worst, failure) = over_rows(runs, test);
    let detail = format!("{rows} certified rows, {uncertified} uncertified, worst {name} {worst:.3e}");
    match failure {
        None if rows > 0 => Ok(detail),
        None => Err(format!("{detail}; no certified rows")),
        Some(at) => Err(format!("{detail}; first failure at {at}")),
    }
}

fn pythagoras(runs: &[MatrixRun]) -> Outcome {
    matrix_outcome(runs, "relative defect", |row| {
        let d = row.chain.as_ref().map_or(f64::INFINITY, |c| c.pythagoras_defect());
        (d < 1e-8, d)
    })
}

fn coefficient_inequality(runs: &[MatrixRun]) -> Outcome {
    matrix_outcome(runs, "lhs - rhs", |row| {
        let Some(c) = row.chain.as_ref() else {
            return (false, f64::INFINITY);
        };
        let lhs = c.err_coef * c.err_coef;
        let gap = (lhs - c.coef_bound_sampled).max(c.coef_bound_sampled - c.coef_bound_chain);
        (c.sampled_bound_holds(1e-10) && c.chain_bound_holds(1e-10), gap)
    })
}

fn total_bound(runs: &[MatrixRun]) -> Outcome {
    matrix_outcome(runs, "error / bound", |row| {
        let Some(c) = row.chain.as_ref() else {
            return (false, f64::INFINITY);
        };
        (c.err_lsq <= c.total_bound + c.tail_l2 + 1e-10, c.err_lsq / c.total_bound)
    })
}

fn quadrature_bounds(runs: &[MatrixRun]) -> Outcome {
    matrix_outcome(runs, "dual energy * A", |row| {
        let Some(q) = row.quad.as_ref() else {
            return (false, f64::INFINITY);
        };
        let ok = q.sobolev_bound_holds(1e-10)
            && q.sup_bound_holds(1e-10)
            && q.stability_holds(1e-10)
            && q.dual_energy <= 1.0 / row.lower + 1e-10;
        (ok, q.dual_energy * row.lower)
    })
}

fn algebraic_rate() -> Outcome {
    let config = ExperimentConfig {
        basis: Basis::fourier(),
        generator: GeneratorSpec::Jittered,
        oversampling: 2.0,
        jitter: 0.25,
        seed: 7,
        degrees: Some(parse_degrees("dyadic:8..256").unwrap()),
        function: FunctionSpec::Sobolev { sigma: 1.2, eps: 0.05 },
        sigma: 1.2,
        ..ExperimentConfig::default()
    };
    let report = run_quad_experiment(&config).map_err(|e| e.to_string())?;
    let fit = report.lsq_rate.algebraic.ok_or("no algebraic fit")?;
    check(
        fit.slope <= -0.6 && report.uncertified().count() == 0,
        format!("slope {:.4} over {} degrees", fit.slope, fit.points),
    )
}

fn geometric_rate() -> Outcome {
    let target = -2f64.log10();
    let config = ExperimentConfig {
        basis: Basis::fourier(),
        generator: GeneratorSpec::Jittered,
        oversampling: 2.0,
        jitter: 0.25,
        seed: 7,
        degrees: Some(parse_degrees("2..40:2").unwrap()),
        function: FunctionSpec::Analytic { a: 1.25 },
        sigma: 1.2,
        rate_floor: 1e-13,
        ..ExperimentConfig::default()
    };
    let report = run_quad_experiment(&config).map_err(|e| e.to_string())?;
    let lsq = report.lsq_rate.geometric.ok_or("no least-squares fit")?;
    let quad = report.quad_rate.geometric.ok_or("no quadrature fit")?;
    let within = |s: f64| ((s - target) / target).abs() <= 0.15;
    check(
        within(lsq.slope) && within(quad.slope),
        format!(
            "least squares {:.4} ({} pts), quadrature {:.4} ({} pts), target {target:.5}",
            lsq.slope, lsq.points, quad.slope, quad.points
        ),
    )
}

fn weyl_fits() -> Outcome {
    let cases = [
        (Family::Fourier, "dyadic:8..256", 1.0, 0.05, [1.0, 1.5]),
        (Family::Chebyshev, "dyadic:8..128", 1.0, 0.15, [1.0, 1.5]),
        (Family::Legendre, "dyadic:8..128", 2.0, 0.15, [1.5, 2.0]),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (family, degrees, d, tol, sigmas) in cases {
        for sigma in sigmas {
            let config = ExperimentConfig {
                basis: Basis::new(family),
                degrees: Some(parse_degrees(degrees).unwrap()),
                sigma,
                ..ExperimentConfig::default()
            };
            let report = run_weyl_experiment(&config).map_err(|e| e.to_string())?;
            let fit_ok = (report.fit.d - d).abs() <= tol;
            let rows_ok = report.violations().is_empty();
            ok &= fit_ok && rows_ok;
            if sigma == sigmas[0] {
                details.push(format!("{family} d = {:.4}", report.fit.d));
            }
            if !rows_ok {
                details.push(format!("{family} sigma {sigma}: rows {:?} above bound", report.violations()));
            }
        }
    }
    check(ok, details.join(", "))
}

fn torus_remainder() -> Outcome {
    let b = Basis::fourier();
    let degrees = parse_degrees("dyadic:8..512").unwrap();
    let mut worst: f64 = 0.0;
    for sigma in [0.75, 1.0, 2.0] {
        for &n in &degrees {
            let phi = error_function_phi(&b, sigma, n, &PhiOptions::default())
                .map_err(|e| e.to_string())?
                .upper();
            let bound = (sigma - 0.5).powf(-0.5) * (n as f64).powf(0.5 - sigma);
            worst = worst.max(phi / bound);
        }
    }
    check(worst <= 1.0, format!("max upper(phi) / closed form = {worst:.6}"))
}

fn brute_force_oracles() -> Outcome {
    let cases = [
        (Basis::fourier(), Generator::Jittered { jitter: 0.3, seed: 11 }, 1usize),
        (Basis::fourier(), Generator::Random { seed: 5 }, 3),
        (Basis::chebyshev(), Generator::Jittered { jitter: 0.3, seed: 3 }, 5),
        (Basis::chebyshev(), Generator::Random { seed: 9 }, 7),
        (Basis::legendre(), Generator::Jittered { jitter: 0.3, seed: 2 }, 4),
        (Basis::legendre(), Generator::Random { seed: 4 }, 7),
    ];
    let (mut bounds, mut coeffs, mut weights) = (0.0f64, 0.0f64, 0.0f64);
    for (b, generator, n) in cases {
        let dim = b.dim(n);
        let layer = generator.layer(&b, n, 3.0).map_err(|e| e.to_string())?;
        let gram = assemble(&b, &layer).map_err(|e| e.to_string())?;
        let t = brute_gram(&b, layer.nodes(), layer.tau(), dim);
        let (lo, hi) = brute_extremes(&t);
        bounds = bounds
            .max((gram.lower_bound() - lo).abs())
            .max((gram.upper_bound() - hi).abs());

        let f = CoeffFunction::analytic(b, 1.6, 200).map_err(|e| e.to_string())?;
        let samples = f.sample(layer.nodes()).map_err(|e| e.to_string())?;
        let oracle = gauss_solve(t, brute_rhs(&b, layer.nodes(), layer.tau(), &samples, dim));
        let p = quasi_interpolant(&gram, &samples).map_err(|e| e.to_string())?;
        for (x, y) in p.a.iter().zip(&oracle) {
            coeffs = coeffs.max((x - y).norm());
        }

        let rule = dual_weights(&gram).map_err(|e| e.to_string())?;
        for (w, o) in rule.weights().iter().zip(least_norm_weights(&b, &layer)) {
            weights = weights.max((w - o).norm());
        }
    }
    check(
        bounds < 1e-8 && coeffs < 1e-8 && weights < 1e-8,
        format!("frame bounds {bounds:.2e}, coefficients {coeffs:.2e}, weights {weights:.2e}"),
    )
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["frame", "--generator", "random", "--seed", "13", "--degrees", "dyadic:2..32"],
        &["approx", "--basis", "legendre", "--generator", "random", "--oversampling", "3", "--seed", "13", "--degrees", "dyadic:2..32"],
        &["quad", "--basis", "chebyshev", "--generator", "jittered", "--seed", "13", "--degrees", "dyadic:2..32", "--function", "hat"],
        &["weyl", "--basis", "chebyshev", "--degrees", "dyadic:8..64"],
        &["gen-nodes", "--generator", "jittered", "--seed", "13", "--degrees", "4,8"],
    ];
    for args in runs {
        let go = || {
            Command::new(env!("CARGO_BIN_EXE_mzquad"))
                .args(args)
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (go()?, go()?);
        if !a.status.success() || a.stdout.is_empty() {
            return Err(format!("{} exited with {}", args[0], a.status));
        }
        if a.stdout != b.stdout {
            return Err(format!("{} output differs between runs", args[0]));
        }
    }
    Ok("frame, approx, quad, weyl and gen-nodes repeat byte for byte".into())
}

fn main() -> ExitCode {
    let started = Instant::now();
    let matrix = test_matrix();
    let on_matrix = |f: fn(&[MatrixRun]) -> Outcome| -> Outcome {
        match &matrix {
            Ok(runs) => f(runs),
            Err(e) => Err(e.clone()),
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("identity Gram on uniform torus layers", identity_gram()),
        ("trapezoid weights recovered", trapezoid_recovery()),
        ("orthogonal decomposition of the error", on_matrix(pythagoras)),
        ("coefficient error inequality", on_matrix(coefficient_inequality)),
        ("final least-squares bound", on_matrix(total_bound)),
        ("algebraic convergence rate", algebraic_rate()),
        ("geometric convergence rate", geometric_rate()),
        ("quadrature bounds and stability", on_matrix(quadrature_bounds)),
        ("Weyl fits and remainder power law", weyl_fits()),
        ("torus remainder closed form", torus_remainder()),
        ("brute-force oracle agreement", brute_force_oracles()),
        ("CLI determinism", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("AC{:<2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("AC{:<2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        results.len() - failed,
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
