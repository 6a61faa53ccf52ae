//! Orthonormal systems on a probability space, indexed so that `φ_1 ≡ 1`.
//!
//! Mode indices `j` are 1-based throughout the public API and follow the
//! canonical enumeration by non-decreasing `λ_j`:
//!
//! | family      | measure                    | `φ_j`                              | `λ_j`         |
//! |-------------|----------------------------|------------------------------------|---------------|
//! | `fourier`   | Lebesgue on `(-1/2, 1/2]`  | `e^{2πi m x}`, m = 0, +1, -1, +2, … | `|m|`         |
//! | `chebyshev` | `dx / (π √(1-x²))`         | `1`, `√2 T_k(x)`                   | `k = j - 1`   |
//! | `legendre`  | `dx / 2`                   | `√(2k+1) P_k(x)`                   | `k = j - 1`   |

use std::f64::consts::PI;
use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub mod spectral;

pub use spectral::{
    bessel_partial_sum, embedding_constant, error_function_phi, weyl_fit, PhiOptions,
    SpectralProfile, WeylFit, DEFAULT_GRID,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Fourier,
    Chebyshev,
    Legendre,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Fourier, Family::Chebyshev, Family::Legendre];

    pub fn name(self) -> &'static str {
        match self {
            Family::Fourier => "fourier",
            Family::Chebyshev => "chebyshev",
            Family::Legendre => "legendre",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fourier" | "torus" => Ok(Family::Fourier),
            "chebyshev" => Ok(Family::Chebyshev),
            "legendre" => Ok(Family::Legendre),
            other => Err(Error::Config(format!("unknown basis '{other}'"))),
        }
    }
}

/// Probability measure the basis is orthonormal against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// Lebesgue measure on the torus `(-1/2, 1/2]`.
    Lebesgue,
    /// `dx / (π √(1 - x²))` on `[-1, 1]`.
    Arcsine,
    /// `dx / 2` on `[-1, 1]`.
    Uniform,
}

/// An orthonormal system `{φ_j}` together with its eigenvalue sequence `λ_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Basis {
    family: Family,
}

impl Basis {
    pub fn new(family: Family) -> Self {
        Basis { family }
    }

    pub fn fourier() -> Self {
        Basis::new(Family::Fourier)
    }

    pub fn chebyshev() -> Self {
        Basis::new(Family::Chebyshev)
    }

    pub fn legendre() -> Self {
        Basis::new(Family::Legendre)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn measure(&self) -> Measure {
        match self.family {
            Family::Fourier => Measure::Lebesgue,
            Family::Chebyshev => Measure::Arcsine,
            Family::Legendre => Measure::Uniform,
        }
    }

    /// Closed hull of the domain. The torus is represented by `(-1/2, 1/2]`;
    /// `-1/2` is accepted as the same point as `1/2`.
    pub fn domain(&self) -> (f64, f64) {
        match self.family {
            Family::Fourier => (-0.5, 0.5),
            Family::Chebyshev | Family::Legendre => (-1.0, 1.0),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    pub fn check_point(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                family: self.family,
                x,
            })
        }
    }

    /// Whether basis functions take complex values.
    pub fn is_complex(&self) -> bool {
        self.family == Family::Fourier
    }

    /// Signed frequency of the `j`-th torus mode: 0, +1, -1, +2, -2, ….
    pub fn frequency(j: usize) -> i64 {
        debug_assert!(j >= 1);
        let m = (j / 2) as i64;
        if j == 1 {
            0
        } else if j % 2 == 0 {
            m
        } else {
            -m
        }
    }

    /// `λ_j` for the 1-based mode index `j`.
    pub fn lambda(&self, j: usize) -> usize {
        debug_assert!(j >= 1);
        match self.family {
            Family::Fourier => j / 2,
            Family::Chebyshev | Family::Legendre => j - 1,
        }
    }

    /// `dim P_n = #{j : λ_j ≤ n}`.
    pub fn dim(&self, n: usize) -> usize {
        match self.family {
            Family::Fourier => 2 * n + 1,
            Family::Chebyshev | Family::Legendre => n + 1,
        }
    }

    /// Number of modes with `λ_j = level`.
    pub fn multiplicity(&self, level: usize) -> usize {
        match (self.family, level) {
            (Family::Fourier, 0) => 1,
            (Family::Fourier, _) => 2,
            _ => 1,
        }
    }

    /// `sup_x Σ_{λ_j = level} |φ_j(x)|²`. For all three families the supremum is
    /// attained at one common point for every level (everywhere on the torus,
    /// at `x = ±1` for the polynomial bases).
    pub fn level_sup_mass(&self, level: usize) -> f64 {
        match (self.family, level) {
            (_, 0) => 1.0,
            (Family::Fourier, _) | (Family::Chebyshev, _) => 2.0,
            (Family::Legendre, k) => (2 * k + 1) as f64,
        }
    }

    /// `sup_x |φ_j(x)|` for a mode on the given level.
    pub fn mode_sup_norm(&self, level: usize) -> f64 {
        match (self.family, level) {
            (_, 0) => 1.0,
            (Family::Fourier, _) => 1.0,
            (Family::Chebyshev, _) => std::f64::consts::SQRT_2,
            (Family::Legendre, k) => ((2 * k + 1) as f64).sqrt(),
        }
    }

    /// Constants `(C, d)` with `sup_x Σ_{λ_j ≤ N} |φ_j(x)|² ≤ C (N + 1)^d` for all `N ≥ 0`.
    pub fn weyl_constants(&self) -> (f64, f64) {
        match self.family {
            Family::Fourier | Family::Chebyshev => (2.0, 1.0),
            Family::Legendre => (1.0, 2.0),
        }
    }

    /// Critical Sobolev exponent `d / 2`.
    pub fn critical_sigma(&self) -> f64 {
        self.weyl_constants().1 / 2.0
    }

    /// `φ_j(x)`.
    pub fn eval(&self, j: usize, x: f64) -> Result<Complex64> {
        if j == 0 {
            return Err(Error::ZeroIndex);
        }
        self.check_point(x)?;
        let k = self.lambda(j);
        Ok(match self.family {
            Family::Fourier => {
                let (s, c) = (2.0 * PI * Basis::frequency(j) as f64 * x).sin_cos();
                Complex64::new(c, s)
            }
            Family::Chebyshev => {
                if k == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    let theta = x.clamp(-1.0, 1.0).acos();
                    Complex64::new(std::f64::consts::SQRT_2 * (k as f64 * theta).cos(), 0.0)
                }
            }
            Family::Legendre => {
                let p = legendre_p(k, x);
                Complex64::new(((2 * k + 1) as f64).sqrt() * p, 0.0)
            }
        })
    }

    /// `φ_1(x), …, φ_count(x)`.
    pub fn eval_modes(&self, count: usize, x: f64) -> Result<Vec<Complex64>> {
        self.check_point(x)?;
        let mut out = vec![Complex64::new(0.0, 0.0); count];
        self.fill_modes(x, &mut out);
        Ok(out)
    }

    /// Writes `φ_1(x), …, φ_{out.len()}(x)` into `out`. The caller guarantees
    /// that `x` lies in the domain.
    pub(crate) fn fill_modes(&self, x: f64, out: &mut [Complex64]) {
        match self.family {
            Family::Fourier => {
                for (i, v) in out.iter_mut().enumerate() {
                    let (s, c) = (2.0 * PI * Basis::frequency(i + 1) as f64 * x).sin_cos();
                    *v = Complex64::new(c, s);
                }
            }
            Family::Chebyshev => {
                let theta = x.clamp(-1.0, 1.0).acos();
                for (k, v) in out.iter_mut().enumerate() {
                    let t = if k == 0 {
                        1.0
                    } else {
                        std::f64::consts::SQRT_2 * (k as f64 * theta).cos()
                    };
                    *v = Complex64::new(t, 0.0);
                }
            }
            Family::Legendre => {
                let (mut prev, mut cur) = (0.0, 1.0);
                for (k, v) in out.iter_mut().enumerate() {
                    *v = Complex64::new(((2 * k + 1) as f64).sqrt() * cur, 0.0);
                    let kf = k as f64;
                    let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
                    prev = cur;
                    cur = next;
                }
            }
        }
    }

    /// `k^{(n)}_x(y) = Σ_{λ_j ≤ n} conj(φ_j(x)) φ_j(y)`.
    pub fn reproducing_kernel(&self, n: usize, x: f64, y: f64) -> Result<Complex64> {
        self.check_point(x)?;
        self.check_point(y)?;
        let dim = self.dim(n);
        let mut px = vec![Complex64::new(0.0, 0.0); dim];
        let mut py = vec![Complex64::new(0.0, 0.0); dim];
        self.fill_modes(x, &mut px);
        self.fill_modes(y, &mut py);
        Ok(px.iter().zip(&py).map(|(a, b)| a.conj() * b).sum())
    }

    /// Spectral function `Σ_{λ_j ≤ n} |φ_j(x)|²`, the reciprocal of the
    /// Christoffel function.
    pub fn spectral_function(&self, n: usize, x: f64) -> Result<f64> {
        self.check_point(x)?;
        let mut modes = vec![Complex64::new(0.0, 0.0); self.dim(n)];
        self.fill_modes(x, &mut modes);
        Ok(modes.iter().map(|v| v.norm_sqr()).sum())
    }

    /// Equispaced grid of `size` points used for sup estimates. Interval
    /// grids include both endpoints; the torus grid is `-1/2 + (i+1)/size`.
    pub fn sup_grid(&self, size: usize) -> Vec<f64> {
        let size = size.max(2);
        match self.family {
            Family::Fourier => (0..size)
                .map(|i| -0.5 + (i + 1) as f64 / size as f64)
                .collect(),
            _ => (0..size)
                .map(|i| (-1.0 + 2.0 * i as f64 / (size - 1) as f64).clamp(-1.0, 1.0))
                .collect(),
        }
    }

    /// Reference integrator against `μ`: Gauss–Legendre with
    /// `4 (max_level + 1)` nodes, mapped onto the torus interval, onto
    /// `[-1, 1]`, or onto `θ ∈ [0, π]` with `x = cos θ` for Chebyshev.
    /// Returns `(x, weight)` pairs whose weights sum to 1.
    pub fn reference_rule(&self, max_level: usize) -> Vec<(f64, f64)> {
        let count = 4 * (max_level + 1);
        gauss_legendre_unit(count)
            .into_iter()
            .map(|(t, w)| match self.family {
                Family::Fourier => (t / 2.0, w / 2.0),
                Family::Legendre => (t, w / 2.0),
                Family::Chebyshev => ((PI * (t + 1.0) / 2.0).cos(), w / 2.0),
            })
            .collect()
    }

    /// `⟨φ_j, φ_{j'}⟩_μ` computed with the reference integrator.
    pub fn inner_product(&self, j: usize, jp: usize) -> Result<Complex64> {
        if j == 0 || jp == 0 {
            return Err(Error::ZeroIndex);
        }
        let level = self.lambda(j) + self.lambda(jp) + 1;
        let mut sum = Complex64::new(0.0, 0.0);
        for (x, w) in self.reference_rule(level) {
            sum += self.eval(j, x)? * self.eval(jp, x)?.conj() * w;
        }
        Ok(sum)
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::from_str(s).map(Basis::new)
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.family.fmt(f)
    }
}

/// Unnormalised Legendre polynomial `P_k(x)` by the three-term recurrence.
pub(crate) fn legendre_p(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for i in 0..k {
        let fi = i as f64;
        let next = ((2.0 * fi + 1.0) * x * cur - fi * prev) / (fi + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Gauss–Legendre nodes on `[-1, 1]` in increasing order with weights summing to 2.
pub(crate) fn gauss_legendre_unit(count: usize) -> Vec<(f64, f64)> {
    let count = NonZeroUsize::new(count.max(1)).expect("count is positive");
    let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(count)
        .as_node_weight_pairs()
        .to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}
