//! Test functions with closed-form coefficients, Sobolev norms, orthogonal
//! projection and the weighted least-squares quasi-interpolant.
//!
//! A [`CoeffFunction`] is evaluated as its series truncated at level
//! `lambda_max`; that truncation is itself a member of every Sobolev space
//! the full series belongs to, with a smaller norm. Errors against samples
//! are therefore exact statements about the truncated function, while norms
//! of the full series come with certified tail brackets.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{error_function_phi, Basis, Family, PhiOptions};
use crate::error::{Error, Result};
use crate::linalg::hpd_solve;
use crate::mzfamily::{GramSystem, DEFAULT_FLOOR};
use crate::Estimate;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const HAT_SCALE: f64 = 2.0 / (PI * PI);

/// Closed-form coefficient laws, all depending on the level `λ_j` only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoeffKind {
    /// `f̂(j) = (1 + λ_j)^{-σ-1/2-ε}`: in `H^s` exactly for `s < σ + ε`.
    Sobolev { sigma: f64, eps: f64 },
    /// `f̂(j) = (1 + λ_j)^{-exponent}`.
    PowerLaw { exponent: f64 },
    /// `f̂(j) = r^{λ_j} / √(a² - 1)` with `r = a - √(a² - 1)`; on the torus
    /// this is `1 / (a - cos 2πx)`.
    Analytic { a: f64 },
    /// `f̂ = 1/2` on level 0, `2/(π² λ²)` on odd levels, 0 otherwise; on the
    /// torus this is the triangle wave `1 - 2|x|`.
    Hat,
    /// Finitely many explicit coefficients.
    Custom,
}

impl CoeffKind {
    fn exponent(&self) -> Option<f64> {
        match *self {
            CoeffKind::Sobolev { sigma, eps } => Some(sigma + 0.5 + eps),
            CoeffKind::PowerLaw { exponent } => Some(exponent),
            _ => None,
        }
    }

    /// Coefficient on a given level.
    pub fn level_coeff(&self, level: usize) -> f64 {
        let l = level as f64;
        match *self {
            CoeffKind::Sobolev { .. } | CoeffKind::PowerLaw { .. } => {
                (1.0 + l).powf(-self.exponent().unwrap_or(0.0))
            }
            CoeffKind::Analytic { a } => {
                let s = (a * a - 1.0).sqrt();
                (a - s).powi(level as i32) / s
            }
            CoeffKind::Hat => {
                if level == 0 {
                    0.5
                } else if level % 2 == 1 {
                    HAT_SCALE / (l * l)
                } else {
                    0.0
                }
            }
            CoeffKind::Custom => 0.0,
        }
    }
}

/// A function given by its coefficient sequence in a basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffFunction {
    basis: Basis,
    kind: CoeffKind,
    lambda_max: usize,
    coeffs: Vec<Complex64>,
}

impl CoeffFunction {
    fn from_kind(basis: Basis, kind: CoeffKind, lambda_max: usize) -> Self {
        let coeffs = (1..=basis.dim(lambda_max))
            .map(|j| Complex64::new(kind.level_coeff(basis.lambda(j)), 0.0))
            .collect();
        CoeffFunction {
            basis,
            kind,
            lambda_max,
            coeffs,
        }
    }

    pub fn sobolev(basis: Basis, sigma: f64, eps: f64, lambda_max: usize) -> Result<Self> {
        if !(sigma >= 0.0 && eps > 0.0) {
            return Err(Error::Config(format!(
                "sobolev test function needs sigma >= 0 and eps > 0, got ({sigma}, {eps})"
            )));
        }
        Ok(Self::from_kind(basis, CoeffKind::Sobolev { sigma, eps }, lambda_max))
    }

    pub fn power_law(basis: Basis, exponent: f64, lambda_max: usize) -> Result<Self> {
        if !(exponent > 0.5) {
            return Err(Error::Config(format!(
                "power-law exponent must exceed 1/2, got {exponent}"
            )));
        }
        Ok(Self::from_kind(basis, CoeffKind::PowerLaw { exponent }, lambda_max))
    }

    pub fn analytic(basis: Basis, a: f64, lambda_max: usize) -> Result<Self> {
        if !(a > 1.0) {
            return Err(Error::Config(format!("analytic parameter must exceed 1, got {a}")));
        }
        Ok(Self::from_kind(basis, CoeffKind::Analytic { a }, lambda_max))
    }

    pub fn hat(basis: Basis, lambda_max: usize) -> Self {
        Self::from_kind(basis, CoeffKind::Hat, lambda_max)
    }

    /// Explicit coefficients in canonical order, padded with zeros to a full level.
    pub fn custom(basis: Basis, mut coeffs: Vec<Complex64>) -> Self {
        let levels = if coeffs.is_empty() {
            0
        } else {
            basis.lambda(coeffs.len())
        };
        coeffs.resize(basis.dim(levels), ZERO);
        CoeffFunction {
            basis,
            kind: CoeffKind::Custom,
            lambda_max: levels,
            coeffs,
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn kind(&self) -> CoeffKind {
        self.kind
    }

    pub fn lambda_max(&self) -> usize {
        self.lambda_max
    }

    /// Number of coefficients kept, `dim P_{λ_max}`.
    pub fn k_max(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `f̂(j)` for 1-based `j`, from the closed form where one exists.
    pub fn coeff(&self, j: usize) -> Complex64 {
        match self.kind {
            CoeffKind::Custom => self.coeffs.get(j - 1).copied().unwrap_or(ZERO),
            kind => Complex64::new(kind.level_coeff(self.basis.lambda(j)), 0.0),
        }
    }

    /// `I(f) = ∫ f dμ = f̂(1)`.
    pub fn integral(&self) -> Complex64 {
        self.coeff(1)
    }

    /// Value of the truncated series at `x`.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        self.basis.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: f64) -> Complex64 {
        let mut modes = vec![ZERO; self.coeffs.len()];
        self.basis.fill_modes(x, &mut modes);
        modes.iter().zip(&self.coeffs).map(|(p, c)| p * c).sum()
    }

    /// Values of the truncated series at every point.
    pub fn sample(&self, points: &[f64]) -> Result<Vec<Complex64>> {
        for &x in points {
            self.basis.check_point(x)?;
        }
        Ok(points.par_iter().map(|&x| self.eval_unchecked(x)).collect())
    }

    /// Per-level bound `mult(λ) · sup|φ_j| ≤ γ (1 + λ)^β`.
    fn sup_growth(&self) -> (f64, f64) {
        match self.basis.family() {
            Family::Fourier => (2.0, 0.0),
            Family::Chebyshev => (std::f64::consts::SQRT_2, 0.0),
            Family::Legendre => (std::f64::consts::SQRT_2, 0.5),
        }
    }

    fn max_multiplicity(&self) -> f64 {
        self.basis.multiplicity(1) as f64
    }

    /// Bound on `sup_x |f(x) - f_K(x)|` where `f_K` is the truncated series.
    /// Infinite when the coefficient law is not absolutely summable.
    pub fn tail_sup_bound(&self) -> f64 {
        let k = self.lambda_max as f64;
        let (gamma, beta) = self.sup_growth();
        match self.kind {
            CoeffKind::Custom => 0.0,
            CoeffKind::Sobolev { .. } | CoeffKind::PowerLaw { .. } => {
                let p = self.kind.exponent().unwrap_or(0.0);
                if p <= beta + 1.0 {
                    f64::INFINITY
                } else {
                    gamma * (1.0 + k).powf(beta - p + 1.0) / (p - beta - 1.0)
                }
            }
            CoeffKind::Analytic { a } => {
                let r = a - (a * a - 1.0).sqrt();
                let first = gamma * (2.0 + k).powf(beta) * self.kind.level_coeff(self.lambda_max + 1);
                let q = r * ((k + 3.0) / (k + 2.0)).powf(beta);
                first / (1.0 - q)
            }
            CoeffKind::Hat => {
                let k = k.max(1.0);
                gamma * HAT_SCALE * 2f64.powf(beta) * k.powf(beta - 1.0) / (1.0 - beta)
            }
        }
    }

    /// Bound on `‖f - f_K‖_2`.
    pub fn tail_l2(&self) -> f64 {
        let k = self.lambda_max as f64;
        let m = self.max_multiplicity();
        match self.kind {
            CoeffKind::Custom => 0.0,
            CoeffKind::Sobolev { .. } | CoeffKind::PowerLaw { .. } => {
                let p = self.kind.exponent().unwrap_or(0.0);
                (m * (1.0 + k).powf(1.0 - 2.0 * p) / (2.0 * p - 1.0)).sqrt()
            }
            CoeffKind::Analytic { a } => {
                let r = a - (a * a - 1.0).sqrt();
                let first = self.kind.level_coeff(self.lambda_max + 1);
                (m * first * first / (1.0 - r * r)).sqrt()
            }
            CoeffKind::Hat => {
                let k = k.max(1.0);
                (m * HAT_SCALE * HAT_SCALE * k.powi(-3) / 3.0).sqrt()
            }
        }
    }

    /// Supremum of admissible Sobolev exponents, `None` if every `s ≥ 0` works.
    pub fn sobolev_supremum(&self) -> Option<f64> {
        match self.kind {
            CoeffKind::Sobolev { .. } | CoeffKind::PowerLaw { .. } => {
                Some(self.kind.exponent().unwrap_or(0.0) - 0.5)
            }
            CoeffKind::Hat => Some(1.5),
            CoeffKind::Analytic { .. } | CoeffKind::Custom => None,
        }
    }

    /// Bracket for `Σ_{λ > cut} mult(λ) |c(λ)|² (1 + λ²)^s`.
    fn norm_tail_bracket(&self, s: f64, cut: usize) -> (f64, f64) {
        let k = cut as f64;
        let m = self.max_multiplicity();
        match self.kind {
            CoeffKind::Custom => (0.0, 0.0),
            CoeffKind::Sobolev { .. } | CoeffKind::PowerLaw { .. } => {
                let p = self.kind.exponent().unwrap_or(0.0);
                let q = 2.0 * s - 2.0 * p + 1.0;
                let hi = m * (1.0 + k).powf(q) / -q;
                let lo = m * (1.0 - 2.0 / (k + 2.0)).powf(s) * (k + 2.0).powf(q) / -q;
                (lo, hi)
            }
            CoeffKind::Analytic { a } => {
                let r = a - (a * a - 1.0).sqrt();
                let next = k + 1.0;
                let c = self.kind.level_coeff(cut + 1);
                let first = m * c * c * (1.0 + next * next).powf(s);
                let ratio = r * r * (1.0 + (2.0 * k + 3.0) / (1.0 + next * next)).powf(s);
                if ratio < 1.0 {
                    (first, first / (1.0 - ratio))
                } else {
                    (first, f64::INFINITY)
                }
            }
            CoeffKind::Hat => {
                let k = k.max(1.0);
                let first_odd = if cut % 2 == 0 { k + 1.0 } else { k + 2.0 };
                let integral = 0.5 * first_odd.powf(2.0 * s - 3.0) / (3.0 - 2.0 * s);
                let scale = m * HAT_SCALE * HAT_SCALE;
                let lo = scale * integral;
                let hi = scale
                    * (1.0 + 1.0 / (k * k)).powf(s)
                    * (first_odd.powf(2.0 * s - 4.0) + integral);
                (lo, hi)
            }
        }
    }
}

/// Sobolev norm `(Σ_j |f̂(j)|² (1 + λ_j²)^σ)^{1/2}` of the full series: the
/// true value lies in `[value, value + tail_bound]`.
pub fn sobolev_norm(f: &CoeffFunction, sigma: f64) -> Result<Estimate> {
    if !(sigma >= 0.0) {
        return Err(Error::Config(format!("sigma must be non-negative, got {sigma}")));
    }
    if let Some(sup) = f.sobolev_supremum() {
        if sigma >= sup {
            return Err(Error::NormDivergent {
                sigma,
                supremum: sup,
            });
        }
    }
    let basis = f.basis;
    let term = |level: usize| {
        let l = level as f64;
        (1.0 + l * l).powf(sigma)
    };
    if f.kind == CoeffKind::Custom {
        let total: f64 = f
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.norm_sqr() * term(basis.lambda(i + 1)))
            .sum();
        return Ok(Estimate::exact(total.sqrt()));
    }
    const MAX_LEVEL: usize = 1 << 24;
    const REL_WIDTH: f64 = 1e-12;
    let mut partial = 0.0;
    let mut level = 0;
    let mut checkpoint = f.lambda_max.max(1024);
    loop {
        while level <= checkpoint {
            let c = f.kind.level_coeff(level);
            partial += basis.multiplicity(level) as f64 * c * c * term(level);
            level += 1;
        }
        let (lo, hi) = f.norm_tail_bracket(sigma, checkpoint);
        if hi - lo <= REL_WIDTH * (partial + lo) || checkpoint >= MAX_LEVEL {
            let value = (partial + lo).sqrt();
            return Ok(Estimate {
                value,
                tail_bound: (partial + hi).sqrt() - value,
            });
        }
        checkpoint *= 2;
    }
}

/// Coefficients of a member of `P_n` in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCoeffs {
    pub n: usize,
    pub a: Vec<Complex64>,
}

impl PolyCoeffs {
    pub fn new(basis: &Basis, n: usize, a: Vec<Complex64>) -> Result<Self> {
        let dim = basis.dim(n);
        if a.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                found: a.len(),
            });
        }
        Ok(PolyCoeffs { n, a })
    }

    pub fn eval(&self, basis: &Basis, x: f64) -> Result<Complex64> {
        let modes = basis.eval_modes(self.a.len(), x)?;
        Ok(modes.iter().zip(&self.a).map(|(p, c)| p * c).sum())
    }

    pub fn l2_norm(&self) -> f64 {
        self.a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Orthogonal projection `P_n f`: truncation of the coefficient sequence to
/// `λ_j ≤ n`.
pub fn project(f: &CoeffFunction, n: usize) -> PolyCoeffs {
    let dim = f.basis.dim(n);
    let a = (0..dim)
        .map(|i| f.coeffs.get(i).copied().unwrap_or(ZERO))
        .collect();
    PolyCoeffs { n, a }
}

/// Certified bound on `‖f - P_n f‖_∞` for the full series:
/// `Σ_{λ_j > n} |f̂(j)| ‖φ_j‖_∞` over the kept modes plus the truncation tail.
pub fn projection_sup_bound(f: &CoeffFunction, n: usize) -> f64 {
    let basis = f.basis;
    let kept: f64 = f
        .coeffs
        .iter()
        .enumerate()
        .skip(basis.dim(n))
        .map(|(i, c)| c.norm() * basis.mode_sup_norm(basis.lambda(i + 1)))
        .sum();
    kept + f.tail_sup_bound()
}

/// Weighted least-squares fit `a_n = T_n^{-1} U_n* y_n` with
/// `y_{n,k} = τ_{n,k}^{1/2} f(x_{n,k})`.
pub fn quasi_interpolant(gram: &GramSystem, samples: &[Complex64]) -> Result<PolyCoeffs> {
    quasi_interpolant_with_floor(gram, samples, DEFAULT_FLOOR)
}

pub fn quasi_interpolant_with_floor(
    gram: &GramSystem,
    samples: &[Complex64],
    floor: f64,
) -> Result<PolyCoeffs> {
    let layer = gram.layer();
    if samples.len() != layer.len() {
        return Err(Error::Shape {
            expected: layer.len(),
            found: samples.len(),
        });
    }
    let ill = || Error::IllConditioned {
        n: gram.n(),
        lower: gram.lower_bound(),
        floor,
    };
    if !gram.is_certified(floor) {
        return Err(ill());
    }
    let y = DVector::from_iterator(
        samples.len(),
        samples.iter().zip(layer.tau()).map(|(f, t)| f * t.sqrt()),
    );
    let rhs = gram.u().ad_mul(&y);
    let a = hpd_solve(gram.t(), &rhs).ok_or_else(ill)?;
    let residual = gram.u().ad_mul(&(gram.u() * &a - &y)).norm();
    let limit = 1e-8 * y.norm();
    if residual > limit {
        return Err(Error::Residual { residual, limit });
    }
    Ok(PolyCoeffs {
        n: gram.n(),
        a: a.iter().copied().collect(),
    })
}

/// Measured errors of a quasi-interpolant and the bounds that control them.
/// Measured quantities refer to the truncated series; `tail_l2` bounds the
/// L² distance to the full series.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorBreakdown {
    pub n: usize,
    pub lower: f64,
    pub upper: f64,
    pub kappa: f64,
    /// `‖f - P_n f‖_2`.
    pub err_proj: f64,
    /// `‖P_n f - p_n‖_2`.
    pub err_coef: f64,
    /// `‖f - p_n‖_2`.
    pub err_lsq: f64,
    /// `Σ_k |f(x_k) - P_n f(x_k)|² τ_k`.
    pub sampled_residual: f64,
    /// Upper bound on `‖f‖_{H^σ}`.
    pub sobolev_norm: f64,
    /// Upper bound on `φ_σ(n)`.
    pub phi: f64,
    /// `A_n^{-2} B_n · sampled_residual`, bounds `err_coef²`.
    pub coef_bound_sampled: f64,
    /// `κ_n² ‖f‖² φ_σ(n)²`, bounds `err_coef²`.
    pub coef_bound_chain: f64,
    /// `(1 + κ_n²)^{1/2} ‖f‖ φ_σ(n)`, bounds `err_lsq`.
    pub total_bound: f64,
    pub tail_l2: f64,
}

impl ErrorBreakdown {
    /// Relative defect of `‖f-p‖² = ‖f-P_n f‖² + ‖P_n f-p‖²`.
    pub fn pythagoras_defect(&self) -> f64 {
        let lhs = self.err_lsq * self.err_lsq;
        let rhs = self.err_proj * self.err_proj + self.err_coef * self.err_coef;
        let scale = lhs.max(rhs);
        if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs).abs() / scale
        }
    }

    /// `err_coef² ≤ A^{-2} B · residual` within `tol`.
    pub fn sampled_bound_holds(&self, tol: f64) -> bool {
        self.err_coef * self.err_coef <= self.coef_bound_sampled + tol
    }

    /// `A^{-2} B · residual ≤ κ² ‖f‖² φ²` within `tol`.
    pub fn chain_bound_holds(&self, tol: f64) -> bool {
        self.coef_bound_sampled <= self.coef_bound_chain + tol
            && self.err_coef * self.err_coef <= self.coef_bound_chain + tol
    }

    pub fn total_bound_holds(&self, tol: f64) -> bool {
        self.err_lsq <= self.total_bound + tol
    }

    /// Measures the error chain with a precomputed norm and remainder value.
    pub fn measure(
        f: &CoeffFunction,
        gram: &GramSystem,
        samples: &[Complex64],
        p_n: &PolyCoeffs,
        norm: f64,
        phi: f64,
    ) -> Result<Self> {
        let layer = gram.layer();
        if samples.len() != layer.len() {
            return Err(Error::Shape {
                expected: layer.len(),
                found: samples.len(),
            });
        }
        let dim = gram.dim();
        if p_n.a.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                found: p_n.a.len(),
            });
        }
        let proj = project(f, gram.n());
        let err_proj = f.coeffs.iter().skip(dim).map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let err_coef = proj
            .a
            .iter()
            .zip(&p_n.a)
            .map(|(c, a)| (c - a).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let len = f.coeffs.len().max(dim);
        let err_lsq = (0..len)
            .map(|i| {
                let c = f.coeffs.get(i).copied().unwrap_or(ZERO);
                let a = p_n.a.get(i).copied().unwrap_or(ZERO);
                (c - a).norm_sqr()
            })
            .sum::<f64>()
            .sqrt();
        let fn_vec = DVector::from_column_slice(&proj.a);
        let projected = gram.u() * fn_vec;
        let sampled_residual: f64 = projected
            .iter()
            .zip(samples.iter().zip(layer.tau()))
            .map(|(p, (s, t))| (p - s * t.sqrt()).norm_sqr())
            .sum();
        let (lower, upper) = (gram.lower_bound(), gram.upper_bound());
        let kappa = upper / lower;
        Ok(ErrorBreakdown {
            n: gram.n(),
            lower,
            upper,
            kappa,
            err_proj,
            err_coef,
            err_lsq,
            sampled_residual,
            sobolev_norm: norm,
            phi,
            coef_bound_sampled: upper / (lower * lower) * sampled_residual,
            coef_bound_chain: kappa * kappa * norm * norm * phi * phi,
            total_bound: (1.0 + kappa * kappa).sqrt() * norm * phi,
            tail_l2: f.tail_l2(),
        })
    }
}

/// Measured errors and bounds for `p_n` computed from `samples` of `f` on
/// the layer of `gram`.
pub fn error_chain(
    f: &CoeffFunction,
    gram: &GramSystem,
    samples: &[Complex64],
    p_n: &PolyCoeffs,
    sigma: f64,
) -> Result<ErrorBreakdown> {
    let norm = sobolev_norm(f, sigma)?.upper();
    let phi = error_function_phi(f.basis(), sigma, gram.n(), &PhiOptions::default())?.upper();
    ErrorBreakdown::measure(f, gram, samples, p_n, norm, phi)
}
