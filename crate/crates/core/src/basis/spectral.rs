//! Spectral function, the remainder function `φ_σ(n)`, the embedding
//! constant `C_σ` and Weyl-law fits.
//!
//! `φ_σ(n)² = sup_x Σ_{λ_j > n} |φ_j(x)|² (1 + λ_j²)^{-σ}` is evaluated as a
//! grid supremum of the levels `n < λ ≤ λ_max` plus a bracketed tail for the
//! levels above `λ_max`. The grid includes the points where every level of
//! the built-in families attains its maximum, so the grid supremum of the
//! truncated sum is exact for them; for other systems it would only be a
//! lower estimate of the true supremum.
//!
//! The tail above `λ_max` is bounded from above by the smaller of
//!
//! * the dyadic-block estimate `C 2^d 2^{M(d-2σ)} / (1 - 2^{d-2σ})` driven by
//!   the Weyl constants `(C, d)` of the family, with `2^M ≤ λ_max + 1`, and
//! * an integral comparison against the exact per-level supremum mass,
//!
//! and from below by the matching integral comparison, so the reported
//! `value` is a lower bound and `value + tail_bound` an upper bound.

use num_complex::Complex64;
use rayon::prelude::*;

use super::Basis;
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::Estimate;

/// Default number of grid points for sup estimates.
pub const DEFAULT_GRID: usize = 512;
/// Default relative width allowed for the tail bracket.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-3;
const MAX_LAMBDA: usize = 1 << 17;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiOptions {
    pub grid_size: usize,
    /// Truncation level. `None` picks the smallest `λ_max ≥ max(4n, 64)`,
    /// doubling until the tail bracket meets `tolerance`.
    pub lambda_max: Option<usize>,
    /// Relative width allowed for `tail_bound / value`. `None` disables the check.
    pub tolerance: Option<f64>,
}

impl Default for PhiOptions {
    fn default() -> Self {
        PhiOptions {
            grid_size: DEFAULT_GRID,
            lambda_max: None,
            tolerance: Some(DEFAULT_TAIL_TOLERANCE),
        }
    }
}

/// One entry of the remainder function.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralProfile {
    pub sigma: f64,
    pub n: usize,
    pub lambda_max: usize,
    /// Number of modes summed explicitly, `dim P_{λ_max}`.
    pub k_max: usize,
    pub grid_size: usize,
    /// Square root of the grid supremum of the truncated sum.
    pub partial: f64,
    /// Lower bound on `φ_σ(n)`.
    pub value: f64,
    /// `value + tail_bound` is an upper bound on `φ_σ(n)`.
    pub tail_bound: f64,
}

impl SpectralProfile {
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.value,
            tail_bound: self.tail_bound,
        }
    }
}

/// Least-squares fit of `ln sup_x S_n(x) ≈ ln C + d ln n`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylFit {
    pub d: f64,
    pub c: f64,
    pub grid_size: usize,
    pub degrees: Vec<usize>,
    /// Grid supremum of the spectral function at each fitted degree.
    pub sup_values: Vec<f64>,
    /// Largest absolute residual in the log domain.
    pub residual: f64,
}

impl WeylFit {
    /// Estimated critical Sobolev exponent `d / 2`.
    pub fn critical_sigma(&self) -> f64 {
        self.d / 2.0
    }

    /// `C n^d e^{residual}`, which dominates every fitted supremum.
    pub fn envelope(&self, n: usize) -> f64 {
        self.c * (n as f64).powf(self.d) * self.residual.exp()
    }

    /// Constant of the power law `φ_σ(n) ≤ K_σ n^{-σ + d/2}` obtained by
    /// summing the envelope over dyadic blocks:
    /// `K_σ² = C e^{residual} 2^{2σ} / (1 - 2^{d - 2σ})`.
    pub fn remainder_constant(&self, sigma: f64) -> Result<f64> {
        let gap = self.d - 2.0 * sigma;
        if gap >= 0.0 {
            return Err(Error::Divergent {
                sigma,
                critical: self.critical_sigma(),
            });
        }
        let c = self.c * self.residual.exp();
        Ok((c * 2f64.powf(2.0 * sigma) / (1.0 - 2f64.powf(gap))).sqrt())
    }

    /// `K_σ n^{-σ + d/2}`.
    pub fn remainder_bound(&self, sigma: f64, n: usize) -> Result<f64> {
        Ok(self.remainder_constant(sigma)? * (n as f64).powf(self.d / 2.0 - sigma))
    }
}

/// `Σ_{λ_j ≤ λ_max} |φ_j(x)|² (1 + λ_j²)^{-σ}`, the diagonal of the truncated
/// Bessel kernel.
pub fn bessel_partial_sum(basis: &Basis, sigma: f64, lambda_max: usize, x: f64) -> Result<f64> {
    basis.check_point(x)?;
    Ok(weighted_sum(basis, sigma, 0, lambda_max, x))
}

/// Σ over levels `lo ≤ λ ≤ hi`.
fn weighted_sum(basis: &Basis, sigma: f64, lo: usize, hi: usize, x: f64) -> f64 {
    let mut modes = vec![Complex64::new(0.0, 0.0); basis.dim(hi)];
    basis.fill_modes(x, &mut modes);
    modes
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let level = basis.lambda(i + 1);
            (level >= lo).then(|| v.norm_sqr() * weight(level, sigma))
        })
        .sum()
}

fn weight(level: usize, sigma: f64) -> f64 {
    let l = level as f64;
    (1.0 + l * l).powf(-sigma)
}

/// Bracket `(lo, hi)` for `sup_x Σ_{λ_j > cut} |φ_j(x)|² (1 + λ_j²)^{-σ}`.
pub(crate) fn tail_bracket(basis: &Basis, sigma: f64, cut: usize) -> (f64, f64) {
    if cut == 0 {
        let first = basis.level_sup_mass(1) * weight(1, sigma);
        let (lo, hi) = tail_bracket(basis, sigma, 1);
        return (first + lo, first + hi);
    }
    // level masses are α + βλ for λ ≥ 1
    let (alpha, beta) = match basis.family() {
        super::Family::Legendre => (1.0, 2.0),
        _ => (2.0, 0.0),
    };
    let integral = |a: f64| {
        let mut v = alpha * a.powf(1.0 - 2.0 * sigma) / (2.0 * sigma - 1.0);
        if beta > 0.0 {
            v += beta * a.powf(2.0 - 2.0 * sigma) / (2.0 * sigma - 2.0);
        }
        v
    };
    let cutf = cut as f64;
    let hi_integral = integral(cutf);
    let next = cutf + 1.0;
    let lo = (1.0 + 1.0 / (next * next)).powf(-sigma) * integral(next);

    let (c, d) = basis.weyl_constants();
    let m = (cutf + 1.0).log2().floor();
    let ratio = 2f64.powf(d - 2.0 * sigma);
    let dyadic = c * 2f64.powf(d) * 2f64.powf(m * (d - 2.0 * sigma)) / (1.0 - ratio);

    (lo, hi_integral.min(dyadic))
}

fn profile_at(
    basis: &Basis,
    sigma: f64,
    n: usize,
    lambda_max: usize,
    grid_size: usize,
) -> SpectralProfile {
    let cut = lambda_max.max(n);
    let partial_sq = if cut > n {
        basis
            .sup_grid(grid_size)
            .par_iter()
            .map(|&x| weighted_sum(basis, sigma, n + 1, cut, x))
            .reduce(|| 0.0, f64::max)
    } else {
        0.0
    };
    let (lo, hi) = tail_bracket(basis, sigma, cut);
    let value = (partial_sq + lo).sqrt();
    let upper = (partial_sq + hi).sqrt();
    SpectralProfile {
        sigma,
        n,
        lambda_max: cut,
        k_max: basis.dim(cut),
        grid_size,
        partial: partial_sq.sqrt(),
        value,
        tail_bound: (upper - value).max(0.0),
    }
}

/// Remainder function `φ_σ(n)` with a certified tail.
pub fn error_function_phi(
    basis: &Basis,
    sigma: f64,
    n: usize,
    options: &PhiOptions,
) -> Result<SpectralProfile> {
    let critical = basis.critical_sigma();
    if !(sigma > critical) {
        return Err(Error::Divergent { sigma, critical });
    }
    let within = |p: &SpectralProfile, tol: f64| p.tail_bound <= tol * p.value;
    match options.lambda_max {
        Some(lambda_max) => {
            let profile = profile_at(basis, sigma, n, lambda_max, options.grid_size);
            match options.tolerance {
                Some(tol) if !within(&profile, tol) => Err(Error::Truncation {
                    lambda_max: profile.lambda_max,
                    relative: profile.tail_bound / profile.value,
                    tolerance: tol,
                }),
                _ => Ok(profile),
            }
        }
        None => {
            let mut lambda_max = (4 * n).max(64);
            loop {
                let profile = profile_at(basis, sigma, n, lambda_max, options.grid_size);
                let tol = match options.tolerance {
                    Some(tol) => tol,
                    None => return Ok(profile),
                };
                if within(&profile, tol) {
                    return Ok(profile);
                }
                if lambda_max >= MAX_LAMBDA {
                    return Err(Error::Truncation {
                        lambda_max,
                        relative: profile.tail_bound / profile.value,
                        tolerance: tol,
                    });
                }
                lambda_max *= 2;
            }
        }
    }
}

/// Embedding constant `C_σ = (sup_x Σ_j |φ_j(x)|² (1 + λ_j²)^{-σ})^{1/2}`,
/// so that `‖f‖_∞ ≤ C_σ ‖f‖_{H^σ}`.
pub fn embedding_constant(basis: &Basis, sigma: f64, options: &PhiOptions) -> Result<Estimate> {
    let tail = error_function_phi(basis, sigma, 0, options)?;
    // φ_1 ≡ 1 contributes exactly 1 at every point
    let value = (1.0 + tail.value * tail.value).sqrt();
    let upper = (1.0 + tail.upper() * tail.upper()).sqrt();
    Ok(Estimate {
        value,
        tail_bound: upper - value,
    })
}

/// Fits the growth exponent of the spectral function's supremum over the
/// given degrees.
pub fn weyl_fit(basis: &Basis, degrees: &[usize], grid_size: usize) -> Result<WeylFit> {
    if degrees.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            found: degrees.len(),
        });
    }
    if degrees.iter().any(|&n| n == 0) {
        return Err(Error::Config("Weyl fit degrees must be positive".into()));
    }
    let grid = basis.sup_grid(grid_size);
    let sup_values: Vec<f64> = degrees
        .iter()
        .map(|&n| {
            grid.par_iter()
                .map(|&x| {
                    let mut modes = vec![Complex64::new(0.0, 0.0); basis.dim(n)];
                    basis.fill_modes(x, &mut modes);
                    modes.iter().map(|v| v.norm_sqr()).sum::<f64>()
                })
                .reduce(|| 0.0, f64::max)
        })
        .collect();
    let max = sup_values.iter().cloned().fold(f64::MIN, f64::max);
    let min = sup_values.iter().cloned().fold(f64::MAX, f64::min);
    if max - min <= 1e-12 * max {
        return Err(Error::DegenerateFit);
    }
    let xs: Vec<f64> = degrees.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = sup_values.iter().map(|s| s.ln()).collect();
    let line = fit_line(&xs, &ys)?;
    if line.slope.abs() < 1e-12 {
        return Err(Error::DegenerateFit);
    }
    Ok(WeylFit {
        d: line.slope,
        c: line.intercept.exp(),
        grid_size: grid.len(),
        degrees: degrees.to_vec(),
        sup_values,
        residual: line.max_residual,
    })
}
