//! Weighted least-squares approximation and dual-frame quadrature from
//! Marcinkiewicz–Zygmund (MZ) sampling families.
//!
//! An MZ family is a sequence of layers of nodes `x_{n,k}` with positive
//! weights `τ_{n,k}` such that the sampled ℓ² norm `Σ_k |p(x_{n,k})|² τ_{n,k}`
//! is equivalent to the L² norm on every space `P_n` of "polynomials" of
//! degree `n`, with constants `A ≤ B` that do not depend on `n`.
//!
//! The crate is organised bottom-up:
//!
//! * [`basis`]: orthonormal systems (Fourier on the torus, Chebyshev,
//!   Legendre), reproducing kernels, spectral functions, the remainder
//!   function `φ_σ(n)` and Weyl-law fits.
//! * [`mzfamily`]: layer generators, Gram assembly and frame bounds.
//! * [`approx`]: test functions with closed-form coefficients, Sobolev
//!   norms, the least-squares quasi-interpolant and its error chain.
//! * [`quadrature`]: dual-frame quadrature weights and error reports.
//! * [`harness`]: experiment configuration, file formats, rate fitting and
//!   CSV reports used by the `mzquad` binary.

pub mod approx;
pub mod basis;
pub mod error;
pub mod fit;
pub mod harness;
pub mod linalg;
pub mod mzfamily;
pub mod quadrature;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// A quantity known up to a one-sided tail: the true value lies in
/// `[value, value + tail_bound]` unless stated otherwise by the producer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub tail_bound: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            tail_bound: 0.0,
        }
    }

    /// Certified upper bound on the quantity.
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}
