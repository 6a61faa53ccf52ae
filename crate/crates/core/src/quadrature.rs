//! Quadrature rules from the dual frame of an MZ layer.
//!
//! The weights solve a single system `T_n c = e₁` and are
//! `w_k = τ_k^{1/2} conj((U_n c)_k)`, so the rule integrates every element
//! of `P_n` exactly and `Σ_k |w_k|²/τ_k = c₁ ≤ A_n^{-1}`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::approx::{project, projection_sup_bound, sobolev_norm, CoeffFunction};
use crate::basis::{error_function_phi, PhiOptions};
use crate::error::{Error, Result};
use crate::linalg::hpd_solve;
use crate::mzfamily::{GramSystem, Layer, DEFAULT_FLOOR};

/// Grid used for the sup-norm proxy of `f - P_n f`.
pub const SUP_GRID: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadRule {
    layer: Layer,
    weights: Vec<Complex64>,
    exactness_defect: f64,
    dual_energy: f64,
    lower: f64,
    upper: f64,
}

impl QuadRule {
    pub fn n(&self) -> usize {
        self.layer.n()
    }

    pub fn layer(&self) -> &Layer {
        &self.layer
    }

    pub fn nodes(&self) -> &[f64] {
        self.layer.nodes()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// `max_{λ_j ≤ n} |Σ_k w_k φ_j(x_k) - δ_{j1}|`.
    pub fn exactness_defect(&self) -> f64 {
        self.exactness_defect
    }

    /// `Σ_k |w_k|² / τ_k`.
    pub fn dual_energy(&self) -> f64 {
        self.dual_energy
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper
    }

    /// Largest imaginary part among the weights.
    pub fn max_imag(&self) -> f64 {
        self.weights.iter().map(|w| w.im.abs()).fold(0.0, f64::max)
    }

    pub fn weight_sum(&self) -> Complex64 {
        self.weights.iter().sum()
    }
}

/// Dual-frame weights for the layer of `gram`.
pub fn dual_weights(gram: &GramSystem) -> Result<QuadRule> {
    dual_weights_with_floor(gram, DEFAULT_FLOOR)
}

pub fn dual_weights_with_floor(gram: &GramSystem, floor: f64) -> Result<QuadRule> {
    let ill = || Error::IllConditioned {
        n: gram.n(),
        lower: gram.lower_bound(),
        floor,
    };
    if !gram.is_certified(floor) {
        return Err(ill());
    }
    let dim = gram.dim();
    let mut e1 = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    e1[0] = Complex64::new(1.0, 0.0);
    let c = hpd_solve(gram.t(), &e1).ok_or_else(ill)?;
    let uc = gram.u() * &c;
    let tau = gram.layer().tau();
    let weights: Vec<Complex64> = uc
        .iter()
        .zip(tau)
        .map(|(v, t)| v.conj() * t.sqrt())
        .collect();
    let dual_energy = weights.iter().zip(tau).map(|(w, t)| w.norm_sqr() / t).sum();
    // Σ_k w_k φ_j(x_k) = Σ_k (w_k / τ_k^{1/2}) U_kj
    let scaled = DVector::from_iterator(
        weights.len(),
        weights.iter().zip(tau).map(|(w, t)| w / t.sqrt()),
    );
    let moments = gram.u().transpose() * scaled;
    let exactness_defect = moments
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let target = if j == 0 { 1.0 } else { 0.0 };
            (m - target).norm()
        })
        .fold(0.0, f64::max);
    Ok(QuadRule {
        layer: gram.layer().clone(),
        weights,
        exactness_defect,
        dual_energy,
        lower: gram.lower_bound(),
        upper: gram.upper_bound(),
    })
}

/// `I_n(f) = Σ_k f(x_k) w_k`.
pub fn integrate(rule: &QuadRule, samples: &[Complex64]) -> Result<Complex64> {
    if samples.len() != rule.weights.len() {
        return Err(Error::Shape {
            expected: rule.weights.len(),
            found: samples.len(),
        });
    }
    Ok(samples.iter().zip(&rule.weights).map(|(f, w)| f * w).sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadReport {
    pub n: usize,
    pub kappa: f64,
    /// `I(f) = f̂(1)`.
    pub exact: Complex64,
    pub approx: Complex64,
    /// `|I(f) - I_n(f)|`.
    pub error: f64,
    /// `(1 + √κ_n) ‖f‖_{H^σ} φ_σ(n)` from upper bounds on both factors.
    pub bound_sobolev: f64,
    /// `(1 + √κ_n) ‖f - P_n f‖_∞` with the sup taken over a grid.
    pub bound_sup_grid: f64,
    /// `(1 + √κ_n) Σ_{λ_j > n} |f̂(j)| ‖φ_j‖_∞`, a certified version of the above.
    pub bound_sup_certified: f64,
    /// `|I_n(f)|²`.
    pub stability_lhs: f64,
    /// `A_n^{-1} Σ_k |f(x_k)|² τ_k`.
    pub stability_rhs: f64,
    pub dual_energy: f64,
    pub exactness_defect: f64,
    pub max_imag: f64,
}

impl QuadReport {
    pub fn sobolev_bound_holds(&self, tol: f64) -> bool {
        self.error <= self.bound_sobolev + tol
    }

    pub fn sup_bound_holds(&self, tol: f64) -> bool {
        self.error <= self.bound_sup_certified + tol
    }

    pub fn stability_holds(&self, tol: f64) -> bool {
        self.stability_lhs <= self.stability_rhs + tol
    }

    /// Builds the report from a precomputed norm bound and remainder value.
    pub fn measure(
        f: &CoeffFunction,
        rule: &QuadRule,
        samples: &[Complex64],
        norm: f64,
        phi: f64,
    ) -> Result<Self> {
        let approx = integrate(rule, samples)?;
        let exact = f.integral();
        let kappa = rule.upper / rule.lower;
        let factor = 1.0 + kappa.sqrt();
        let basis = f.basis();
        let n = rule.n();

        let proj = project(f, n);
        let tail_coeffs: Vec<Complex64> = f
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| if i < proj.a.len() { Complex64::new(0.0, 0.0) } else { *c })
            .collect();
        let tail = CoeffFunction::custom(*basis, tail_coeffs);
        let grid_sup = tail
            .sample(&basis.sup_grid(SUP_GRID))?
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        let certified = projection_sup_bound(f, n);

        let energy: f64 = samples
            .iter()
            .zip(rule.layer.tau())
            .map(|(s, t)| s.norm_sqr() * t)
            .sum();
        Ok(QuadReport {
            n,
            kappa,
            exact,
            approx,
            error: (exact - approx).norm(),
            bound_sobolev: factor * norm * phi,
            bound_sup_grid: factor * (grid_sup + f.tail_sup_bound()),
            bound_sup_certified: factor * certified,
            stability_lhs: approx.norm_sqr(),
            stability_rhs: energy / rule.lower,
            dual_energy: rule.dual_energy,
            exactness_defect: rule.exactness_defect,
            max_imag: rule.max_imag(),
        })
    }
}

/// Error of `rule` on `f` together with the bounds that control it.
pub fn quad_error_report(
    f: &CoeffFunction,
    rule: &QuadRule,
    samples: &[Complex64],
    sigma: f64,
) -> Result<QuadReport> {
    let norm = sobolev_norm(f, sigma)?.upper();
    let phi = error_function_phi(f.basis(), sigma, rule.n(), &PhiOptions::default())?.upper();
    QuadReport::measure(f, rule, samples, norm, phi)
}
