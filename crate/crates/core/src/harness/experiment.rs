//! Convergence sweeps, frame certification and Weyl-law tables.

use std::fmt::Write as _;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::approx::{
    projection_sup_bound, quasi_interpolant_with_floor, sobolev_norm, CoeffFunction, ErrorBreakdown,
};
use crate::basis::{embedding_constant, error_function_phi, weyl_fit, Family, PhiOptions, WeylFit};
use crate::error::{Error, Result};
use crate::fit::{algebraic_rate, geometric_rate, LineFit};
use crate::harness::config::{ExperimentConfig, GeneratorSpec};
use crate::harness::io::fmt_f64;
use crate::mzfamily::{assemble, frame_report, FrameReport, GramSystem, Layer};
use crate::quadrature::{dual_weights_with_floor, QuadReport, QuadRule, SUP_GRID};

/// Largest admissible relative Pythagoras defect.
pub const PYTHAGORAS_TOLERANCE: f64 = 1e-8;
/// Largest admissible exactness defect of a quadrature rule.
pub const EXACTNESS_TOLERANCE: f64 = 1e-10;
/// Largest admissible deviation from the trapezoid weights `1/L`.
pub const TRAPEZOID_TOLERANCE: f64 = 1e-12;

pub const CONVERGENCE_HEADER: [&str; 12] = [
    "n",
    "L",
    "A",
    "B",
    "kappa",
    "err_proj",
    "err_lsq",
    "bound_lsq",
    "quad_err",
    "bound_quad",
    "defect",
    "certified",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Approx,
    Quad,
}

/// One degree of a convergence sweep.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub n: usize,
    pub len: usize,
    pub lower: f64,
    pub upper: f64,
    pub kappa: f64,
    pub certified: bool,
    /// Present on certified layers.
    pub chain: Option<ErrorBreakdown>,
    pub quad: Option<QuadReport>,
    /// `Σ_k |f(x_k)|² τ_k`.
    pub sampled_energy: f64,
    /// `B_n C_σ² ‖f‖²`.
    pub sampling_bound: f64,
    /// `(1 + κ_n²)^{1/2} ‖f - P_n f‖_∞`.
    pub sup_bound: f64,
    /// `max_k |w_k - 1/L|`, for uniform torus layers only.
    pub trapezoid_deviation: Option<f64>,
    pub violations: Vec<String>,
}

impl ConvergenceRow {
    fn nan(&self, value: Option<f64>) -> f64 {
        value.unwrap_or(f64::NAN)
    }

    pub fn err_proj(&self) -> f64 {
        self.nan(self.chain.as_ref().map(|c| c.err_proj))
    }

    pub fn err_lsq(&self) -> f64 {
        self.nan(self.chain.as_ref().map(|c| c.err_lsq))
    }

    pub fn bound_lsq(&self) -> f64 {
        self.nan(self.chain.as_ref().map(|c| c.total_bound))
    }

    pub fn quad_err(&self) -> f64 {
        self.nan(self.quad.as_ref().map(|q| q.error))
    }

    pub fn bound_quad(&self) -> f64 {
        self.nan(self.quad.as_ref().map(|q| q.bound_sobolev))
    }

    pub fn defect(&self) -> f64 {
        self.nan(self.quad.as_ref().map(|q| q.exactness_defect))
    }

    fn record(&self) -> [String; 12] {
        [
            self.n.to_string(),
            self.len.to_string(),
            fmt_f64(self.lower),
            fmt_f64(self.upper),
            fmt_f64(self.kappa),
            fmt_f64(self.err_proj()),
            fmt_f64(self.err_lsq()),
            fmt_f64(self.bound_lsq()),
            fmt_f64(self.quad_err()),
            fmt_f64(self.bound_quad()),
            fmt_f64(self.defect()),
            self.certified.to_string(),
        ]
    }
}

/// Algebraic and geometric fits of one error column.
#[derive(Clone, Debug, Default)]
pub struct RateFits {
    pub algebraic: Option<LineFit>,
    pub geometric: Option<LineFit>,
}

impl RateFits {
    fn new(degrees: &[usize], errors: &[f64], floor: f64) -> Self {
        RateFits {
            algebraic: algebraic_rate(degrees, errors, floor).ok(),
            geometric: geometric_rate(degrees, errors, floor).ok(),
        }
    }

    fn describe(&self, label: &str, out: &mut String) {
        let fmt = |fit: &Option<LineFit>| match fit {
            Some(f) => format!("{:+.4} (residual {:.2e}, {} points)", f.slope, f.max_residual, f.points),
            None => "n/a".to_string(),
        };
        let _ = writeln!(out, "{label} log-log slope: {}", fmt(&self.algebraic));
        let _ = writeln!(out, "{label} semi-log10 slope: {}", fmt(&self.geometric));
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub mode: Mode,
    pub sigma: f64,
    pub rows: Vec<ConvergenceRow>,
    pub lsq_rate: RateFits,
    pub quad_rate: RateFits,
    /// Upper bound on `‖f‖_{H^σ}`.
    pub sobolev_norm: f64,
    /// Upper bound on the embedding constant `C_σ`.
    pub embedding_constant: f64,
    /// Grid supremum of `|f|`, compared against `C_σ ‖f‖_{H^σ}`.
    pub sup_norm: f64,
    pub global_violations: Vec<String>,
}

impl ConvergenceReport {
    pub fn uncertified(&self) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(|r| !r.certified)
    }

    pub fn violation_count(&self) -> usize {
        self.global_violations.len() + self.rows.iter().map(|r| r.violations.len()).sum::<usize>()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CONVERGENCE_HEADER)?;
        for row in &self.rows {
            w.write_record(row.record())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        match self.mode {
            Mode::Approx => self.lsq_rate.describe("least-squares error", &mut out),
            Mode::Quad => self.quad_rate.describe("quadrature error", &mut out),
        }
        let _ = writeln!(
            out,
            "embedding: sup|f| = {:.6e} <= C_sigma ||f|| = {:.6e}",
            self.sup_norm,
            self.embedding_constant * self.sobolev_norm
        );
        let certified = self.rows.iter().filter(|r| r.certified).count();
        let _ = writeln!(out, "certified layers: {certified}/{}", self.rows.len());
        for v in &self.global_violations {
            let _ = writeln!(out, "violation: {v}");
        }
        for row in &self.rows {
            for v in &row.violations {
                let _ = writeln!(out, "violation at n = {}: {v}", row.n);
            }
        }
        out
    }
}

fn phi_options(config: &ExperimentConfig) -> PhiOptions {
    PhiOptions {
        grid_size: config.grid,
        ..PhiOptions::default()
    }
}

/// Gram system of a layer, or `None` when it has too few nodes for `P_n`.
fn try_assemble(config: &ExperimentConfig, layer: &Layer) -> Result<Option<GramSystem>> {
    match assemble(&config.basis, layer) {
        Ok(g) => Ok(Some(g)),
        Err(Error::Underdetermined { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

struct Shared<'a> {
    config: &'a ExperimentConfig,
    f: &'a CoeffFunction,
    norm: f64,
    c_sigma: f64,
    uniform_torus: bool,
}

fn convergence_row(shared: &Shared<'_>, layer: &Layer) -> Result<ConvergenceRow> {
    let config = shared.config;
    let tol = config.tolerance;
    let mut row = ConvergenceRow {
        n: layer.n(),
        len: layer.len(),
        lower: 0.0,
        upper: f64::NAN,
        kappa: f64::INFINITY,
        certified: false,
        chain: None,
        quad: None,
        sampled_energy: f64::NAN,
        sampling_bound: f64::NAN,
        sup_bound: f64::NAN,
        trapezoid_deviation: None,
        violations: Vec::new(),
    };
    let Some(gram) = try_assemble(config, layer)? else {
        return Ok(row);
    };
    row.lower = gram.lower_bound();
    row.upper = gram.upper_bound();
    row.kappa = gram.condition_number();
    row.certified = gram.is_certified(config.floor);
    if !row.certified {
        return Ok(row);
    }
    let n = layer.n();
    let f = shared.f;
    let phi = error_function_phi(&config.basis, config.sigma, n, &phi_options(config))?.upper();
    let samples = f.sample(layer.nodes())?;
    let p_n = quasi_interpolant_with_floor(&gram, &samples, config.floor)?;
    let chain = ErrorBreakdown::measure(f, &gram, &samples, &p_n, shared.norm, phi)?;
    let rule = dual_weights_with_floor(&gram, config.floor)?;
    let quad = QuadReport::measure(f, &rule, &samples, shared.norm, phi)?;

    row.sampled_energy = samples
        .iter()
        .zip(layer.tau())
        .map(|(s, t)| s.norm_sqr() * t)
        .sum();
    row.sampling_bound = row.upper * shared.c_sigma * shared.c_sigma * shared.norm * shared.norm;
    row.sup_bound = (1.0 + row.kappa * row.kappa).sqrt() * projection_sup_bound(f, n);

    let v = &mut row.violations;
    if chain.pythagoras_defect() > PYTHAGORAS_TOLERANCE {
        v.push(format!("orthogonal decomposition defect {:.3e}", chain.pythagoras_defect()));
    }
    if !chain.sampled_bound_holds(tol) {
        v.push("coefficient error exceeds the sampled-residual bound".into());
    }
    if !chain.chain_bound_holds(tol) {
        v.push("coefficient error exceeds the Sobolev chain bound".into());
    }
    if !chain.total_bound_holds(tol) {
        v.push(format!(
            "least-squares error {:.3e} exceeds bound {:.3e}",
            chain.err_lsq, chain.total_bound
        ));
    }
    if chain.err_lsq > row.sup_bound + tol {
        v.push("least-squares error exceeds the sup-norm projection bound".into());
    }
    if row.sampled_energy > row.sampling_bound + tol {
        v.push("sampled energy exceeds B C_sigma^2 ||f||^2".into());
    }
    if !quad.sobolev_bound_holds(tol) {
        v.push(format!(
            "quadrature error {:.3e} exceeds bound {:.3e}",
            quad.error, quad.bound_sobolev
        ));
    }
    if !quad.sup_bound_holds(tol) {
        v.push("quadrature error exceeds the sup-norm bound".into());
    }
    if !quad.stability_holds(tol) {
        v.push("quadrature stability inequality fails".into());
    }
    if quad.dual_energy > 1.0 / row.lower + tol {
        v.push(format!("dual energy {:.3e} exceeds 1/A", quad.dual_energy));
    }
    if quad.exactness_defect > EXACTNESS_TOLERANCE {
        v.push(format!("exactness defect {:.3e}", quad.exactness_defect));
    }
    if shared.uniform_torus {
        let dev = trapezoid_deviation(&rule);
        if dev > TRAPEZOID_TOLERANCE {
            v.push(format!("weights deviate from 1/L by {dev:.3e}"));
        }
        row.trapezoid_deviation = Some(dev);
    }
    row.chain = Some(chain);
    row.quad = Some(quad);
    Ok(row)
}

/// `max_k |w_k - 1/L|`.
pub fn trapezoid_deviation(rule: &QuadRule) -> f64 {
    let inv = Complex64::new(1.0 / rule.weights().len() as f64, 0.0);
    rule.weights().iter().map(|w| (w - inv).norm()).fold(0.0, f64::max)
}

fn run_convergence(config: &ExperimentConfig, mode: Mode) -> Result<ConvergenceReport> {
    let layers = config.layers()?;
    let n_max = layers.iter().map(Layer::n).max().unwrap_or(0);
    let f = config.function.build(config.basis, config.truncation(n_max))?;
    let norm = sobolev_norm(&f, config.sigma)?.upper();
    let c_sigma = embedding_constant(&config.basis, config.sigma, &phi_options(config))?.upper();
    let shared = Shared {
        config,
        f: &f,
        norm,
        c_sigma,
        uniform_torus: config.generator == GeneratorSpec::Uniform
            && config.basis.family() == Family::Fourier,
    };
    let rows = layers
        .par_iter()
        .map(|layer| convergence_row(&shared, layer))
        .collect::<Result<Vec<_>>>()?;

    let sup_norm = f
        .sample(&config.basis.sup_grid(SUP_GRID))?
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let mut global_violations = Vec::new();
    // the sampled series is a truncation; its sup differs from the full one
    // by at most the truncation tail
    if sup_norm > c_sigma * norm + f.tail_sup_bound() + config.tolerance {
        global_violations.push("sup |f| exceeds C_sigma ||f||".into());
    }

    let fitted: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.certified).collect();
    let degrees: Vec<usize> = fitted.iter().map(|r| r.n).collect();
    let lsq: Vec<f64> = fitted.iter().map(|r| r.err_lsq()).collect();
    let quad: Vec<f64> = fitted.iter().map(|r| r.quad_err()).collect();
    Ok(ConvergenceReport {
        mode,
        sigma: config.sigma,
        lsq_rate: RateFits::new(&degrees, &lsq, config.rate_floor),
        quad_rate: RateFits::new(&degrees, &quad, config.rate_floor),
        rows,
        sobolev_norm: norm,
        embedding_constant: c_sigma,
        sup_norm,
        global_violations,
    })
}

/// Least-squares sweep over the configured degrees.
pub fn run_approx_experiment(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    run_convergence(config, Mode::Approx)
}

/// Quadrature sweep; on uniform torus layers the weights are also checked
/// against the trapezoid rule.
pub fn run_quad_experiment(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    run_convergence(config, Mode::Quad)
}

pub const FRAME_HEADER: [&str; 7] = ["n", "L", "A", "B", "kappa", "weight_sum", "certified"];

/// Frame bounds of the configured layers.
pub fn run_frame(config: &ExperimentConfig) -> Result<FrameReport> {
    frame_report(&config.basis, &config.layers()?, config.floor)
}

/// Rows whose weight sum falls outside `[A_n, B_n]`.
pub fn weight_sum_violations(report: &FrameReport, tol: f64) -> Vec<usize> {
    report
        .rows
        .iter()
        .filter(|r| r.certified && !(r.lower - tol <= r.weight_sum && r.weight_sum <= r.upper + tol))
        .map(|r| r.n)
        .collect()
}

pub fn write_frame_csv<W: Write>(report: &FrameReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FRAME_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.n.to_string(),
            r.len.to_string(),
            fmt_f64(r.lower),
            fmt_f64(r.upper),
            fmt_f64(r.kappa),
            fmt_f64(r.weight_sum),
            r.certified.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const WEYL_HEADER: [&str; 6] = [
    "n",
    "sup_spectral",
    "weyl_envelope",
    "phi_sigma",
    "phi_tail",
    "remainder_bound",
];

#[derive(Clone, Debug, PartialEq)]
pub struct WeylRow {
    pub n: usize,
    pub sup_spectral: f64,
    pub envelope: f64,
    /// Lower estimate of `φ_σ(n)`.
    pub phi: f64,
    pub phi_tail: f64,
    /// `K_σ n^{-σ + d/2}` from the fitted constants.
    pub remainder_bound: f64,
}

impl WeylRow {
    /// Whether the certified upper value of `φ_σ(n)` stays below
    /// `(1 + slack)` times the power-law bound.
    pub fn within(&self, slack: f64) -> bool {
        self.phi + self.phi_tail <= (1.0 + slack) * self.remainder_bound
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeylReport {
    pub fit: WeylFit,
    pub sigma: f64,
    pub rows: Vec<WeylRow>,
}

/// Slack allowed between `φ_σ(n)` and the fitted power law.
pub const WEYL_SLACK: f64 = 0.1;

impl WeylReport {
    pub fn violations(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| !r.within(WEYL_SLACK))
            .map(|r| r.n)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(WEYL_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                fmt_f64(r.sup_spectral),
                fmt_f64(r.envelope),
                fmt_f64(r.phi),
                fmt_f64(r.phi_tail),
                fmt_f64(r.remainder_bound),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "growth exponent d = {:.4}, constant C = {:.4}, log residual {:.2e}, critical sigma = {:.4}",
            self.fit.d,
            self.fit.c,
            self.fit.residual,
            self.fit.critical_sigma()
        );
        for n in self.violations() {
            let _ = writeln!(out, "violation at n = {n}: phi_sigma exceeds the power-law bound");
        }
        out
    }
}

/// Weyl-law fit over the configured degrees and the table of `φ_σ(n)`
/// against the power law implied by the fit.
pub fn run_weyl_experiment(config: &ExperimentConfig) -> Result<WeylReport> {
    config.validate()?;
    let degrees = config.degree_list()?;
    let fit = weyl_fit(&config.basis, &degrees, config.grid)?;
    let options = phi_options(config);
    let constant = fit.remainder_constant(config.sigma)?;
    let rows = degrees
        .par_iter()
        .zip(fit.sup_values.par_iter())
        .map(|(&n, &sup)| {
            let profile = error_function_phi(&config.basis, config.sigma, n, &options)?;
            Ok(WeylRow {
                n,
                sup_spectral: sup,
                envelope: fit.envelope(n),
                phi: profile.value,
                phi_tail: profile.tail_bound,
                remainder_bound: constant * (n as f64).powf(fit.d / 2.0 - config.sigma),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeylReport {
        fit,
        sigma: config.sigma,
        rows,
    })
}
