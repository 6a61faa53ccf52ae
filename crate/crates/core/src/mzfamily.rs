//! Sampling layers, Gram systems and frame bounds.
//!
//! A [`Layer`] holds the nodes `x_{n,k}` and positive weights `τ_{n,k}` used
//! for degree `n`. [`assemble`] builds the weighted Vandermonde matrix
//! `U_n[k, l] = τ_{n,k}^{1/2} φ_l(x_{n,k})` and the Gram matrix `T_n = U_n* U_n`
//! whose extreme eigenvalues are the frame bounds `A_n`, `B_n` of the layer.
//! Certification is empirical: a layer counts as a sampling set for `P_n`
//! when `A_n` exceeds a floor.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{gauss_legendre_unit, Basis, Family};
use crate::error::{Error, Result};
use crate::linalg::hermitian_extremes;

/// Default lower-frame-bound floor below which a layer is not certified.
pub const DEFAULT_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    n: usize,
    nodes: Vec<f64>,
    tau: Vec<f64>,
}

impl Layer {
    /// Builds a layer. Weights must be finite and strictly positive; nodes
    /// must be finite. Domain membership is checked against a basis in
    /// [`Layer::validate_for`] and in [`assemble`].
    pub fn new(n: usize, nodes: Vec<f64>, tau: Vec<f64>) -> Result<Self> {
        if nodes.len() != tau.len() {
            return Err(Error::InvalidLayer(format!(
                "{} nodes but {} weights",
                nodes.len(),
                tau.len()
            )));
        }
        if nodes.is_empty() {
            return Err(Error::InvalidLayer(format!("layer n = {n} is empty")));
        }
        if let Some(k) = nodes.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidLayer(format!("node {k} is not finite")));
        }
        if let Some(k) = tau.iter().position(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidLayer(format!(
                "weight {k} = {} is not strictly positive",
                tau[k]
            )));
        }
        Ok(Layer { n, nodes, tau })
    }

    /// Like [`Layer::new`] but drops zero-weight nodes with a warning.
    pub fn with_zero_weights_dropped(n: usize, nodes: Vec<f64>, tau: Vec<f64>) -> Result<Self> {
        if nodes.len() != tau.len() {
            return Layer::new(n, nodes, tau);
        }
        let before = nodes.len();
        let (nodes, tau): (Vec<f64>, Vec<f64>) =
            nodes.into_iter().zip(tau).filter(|(_, t)| *t != 0.0).unzip();
        if nodes.len() < before {
            warn!(
                "layer n = {n}: dropped {} zero-weight node(s)",
                before - nodes.len()
            );
        }
        Layer::new(n, nodes, tau)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.tau.iter().sum()
    }

    pub fn validate_for(&self, basis: &Basis) -> Result<()> {
        for &x in &self.nodes {
            basis.check_point(x)?;
        }
        let dim = basis.dim(self.n);
        if self.len() < dim {
            return Err(Error::Underdetermined {
                n: self.n,
                nodes: self.len(),
                dim,
            });
        }
        Ok(())
    }
}

/// Node generator for a layer of given degree and oversampling factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Generator {
    Uniform,
    /// Uniform nodes displaced by at most `jitter` times the local spacing.
    Jittered { jitter: f64, seed: u64 },
    /// Independent draws from the orthogonality measure, `τ = 1/L`.
    Random { seed: u64 },
}

impl Generator {
    pub fn layer(&self, basis: &Basis, n: usize, oversampling: f64) -> Result<Layer> {
        match *self {
            Generator::Uniform => generate_uniform(basis, n, oversampling),
            Generator::Jittered { jitter, seed } => {
                generate_jittered(basis, n, oversampling, jitter, seed)
            }
            Generator::Random { seed } => generate_random(basis, n, oversampling, seed),
        }
    }
}

fn layer_size(basis: &Basis, n: usize, oversampling: f64) -> Result<usize> {
    if !(oversampling >= 1.0) || !oversampling.is_finite() {
        return Err(Error::Config(format!(
            "oversampling must be at least 1, got {oversampling}"
        )));
    }
    // absorb representation error in products like 1.1 · 10
    Ok((oversampling * basis.dim(n) as f64 - 1e-9).ceil() as usize)
}

/// Reference layer: equispaced torus nodes `-1/2 + k/L`; Chebyshev nodes
/// `cos(kπ/L)`, `k = 1..L`; Gauss–Legendre nodes with weights summing to 1.
/// `τ = 1/L` except for Legendre.
pub fn generate_uniform(basis: &Basis, n: usize, oversampling: f64) -> Result<Layer> {
    let len = layer_size(basis, n, oversampling)?;
    let lf = len as f64;
    let (nodes, tau) = match basis.family() {
        Family::Fourier => (
            (0..len).map(|k| -0.5 + k as f64 / lf).collect(),
            vec![1.0 / lf; len],
        ),
        Family::Chebyshev => (
            (1..=len).map(|k| (k as f64 * PI / lf).cos()).collect(),
            vec![1.0 / lf; len],
        ),
        Family::Legendre => gauss_legendre_unit(len)
            .into_iter()
            .map(|(x, w)| (x, w / 2.0))
            .unzip(),
    };
    Layer::new(n, nodes, tau)
}

/// Uniform draw in `[-1, 1)` keyed by `(seed, n, k)`, independent of call order.
fn keyed_unit(seed: u64, n: usize, k: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    rng.set_word_pos(2 * k as u128);
    rng.random_range(-1.0..1.0)
}

/// Uniform layer with every node displaced by an independent offset of
/// magnitude at most `jitter` times the grid spacing; weights unchanged.
pub fn generate_jittered(
    basis: &Basis,
    n: usize,
    oversampling: f64,
    jitter: f64,
    seed: u64,
) -> Result<Layer> {
    if !(0.0..0.5).contains(&jitter) {
        return Err(Error::Config(format!(
            "jitter must lie in [0, 1/2), got {jitter}"
        )));
    }
    let base = generate_uniform(basis, n, oversampling)?;
    if jitter == 0.0 {
        return Ok(base);
    }
    let len = base.len();
    let lf = len as f64;
    let offset = |k: usize| jitter * keyed_unit(seed, n, k);
    let nodes = match basis.family() {
        Family::Fourier => base
            .nodes
            .iter()
            .enumerate()
            .map(|(k, &x)| wrap_torus(x + offset(k) / lf))
            .collect(),
        Family::Chebyshev => (1..=len)
            .map(|k| {
                let mut theta = (k as f64 + offset(k - 1)) * PI / lf;
                if theta > PI {
                    theta = 2.0 * PI - theta;
                }
                theta.cos()
            })
            .collect(),
        Family::Legendre => {
            let xs = &base.nodes;
            (0..len)
                .map(|k| {
                    let left = if k == 0 { -1.0 } else { xs[k - 1] };
                    let right = if k + 1 == len { 1.0 } else { xs[k + 1] };
                    let spacing = (xs[k] - left).min(right - xs[k]);
                    (xs[k] + offset(k) * spacing).clamp(-1.0, 1.0)
                })
                .collect()
        }
    };
    Layer::new(n, nodes, base.tau)
}

/// `L` independent random nodes. Torus and Chebyshev nodes are drawn from
/// `μ` with `τ = 1/L`. Legendre nodes are drawn from the arcsine measure
/// with importance weights `τ = (π/2) √(1 - x²) / L`, so that `T_n` still
/// has expectation `I`.
pub fn generate_random(basis: &Basis, n: usize, oversampling: f64, seed: u64) -> Result<Layer> {
    let len = layer_size(basis, n, oversampling)?;
    let lf = len as f64;
    let (nodes, tau) = (0..len)
        .map(|k| {
            let u = keyed_unit(seed, n, k);
            match basis.family() {
                Family::Fourier => (wrap_torus(u / 2.0), 1.0 / lf),
                Family::Chebyshev => (((u + 1.0) * PI / 2.0).cos(), 1.0 / lf),
                Family::Legendre => {
                    // u = -1 would put a node on the endpoint with zero weight
                    let theta = (u + 1.0).max(f64::EPSILON) * PI / 2.0;
                    (theta.cos(), PI / 2.0 * theta.sin() / lf)
                }
            }
        })
        .unzip();
    Layer::new(n, nodes, tau)
}

fn wrap_torus(x: f64) -> f64 {
    let y = x - x.round();
    if y <= -0.5 {
        y + 1.0
    } else {
        y
    }
}

fn condition(lower: f64, upper: f64) -> f64 {
    if lower > 0.0 {
        upper / lower
    } else {
        f64::INFINITY
    }
}

/// Weighted Vandermonde matrix, Gram matrix and frame bounds of one layer.
#[derive(Clone, Debug)]
pub struct GramSystem {
    basis: Basis,
    layer: Layer,
    u: DMatrix<Complex64>,
    t: DMatrix<Complex64>,
    a_n: f64,
    b_n: f64,
}

impl GramSystem {
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn layer(&self) -> &Layer {
        &self.layer
    }

    pub fn n(&self) -> usize {
        self.layer.n
    }

    pub fn dim(&self) -> usize {
        self.u.ncols()
    }

    /// `U_n`, shape `L_n × dim P_n`.
    pub fn u(&self) -> &DMatrix<Complex64> {
        &self.u
    }

    /// `T_n = U_n* U_n`.
    pub fn t(&self) -> &DMatrix<Complex64> {
        &self.t
    }

    /// Lower frame bound `A_n`, the smallest eigenvalue of `T_n`.
    pub fn lower_bound(&self) -> f64 {
        self.a_n
    }

    /// Upper frame bound `B_n`, the largest eigenvalue of `T_n`.
    pub fn upper_bound(&self) -> f64 {
        self.b_n
    }

    /// `B_n / A_n`, infinite when `A_n` is not positive.
    pub fn condition_number(&self) -> f64 {
        condition(self.a_n, self.b_n)
    }

    pub fn is_certified(&self, floor: f64) -> bool {
        self.a_n > floor
    }

    /// `⟨T_n a, a⟩`, the sampled energy `Σ_k |p(x_{n,k})|² τ_{n,k}` of the
    /// polynomial with coefficients `a`.
    pub fn quadratic_form(&self, a: &[Complex64]) -> f64 {
        let v = DVector::from_column_slice(a);
        v.dotc(&(&self.t * &v)).re
    }

    /// Largest entrywise deviation of `T_n` from its adjoint.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.t.nrows() {
            for j in 0..self.t.ncols() {
                worst = worst.max((self.t[(i, j)] - self.t[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// For the torus, the largest spread of `T_n` entries that share the same
    /// frequency difference (zero for an exact Toeplitz matrix). `None` for
    /// other bases.
    pub fn toeplitz_spread(&self) -> Option<f64> {
        if self.basis.family() != Family::Fourier {
            return None;
        }
        let mut groups: BTreeMap<i64, (Complex64, f64)> = BTreeMap::new();
        let dim = self.dim();
        for l in 0..dim {
            for lp in 0..dim {
                let diff = Basis::frequency(lp + 1) - Basis::frequency(l + 1);
                let v = self.t[(l, lp)];
                let entry = groups.entry(diff).or_insert((v, 0.0));
                entry.1 = entry.1.max((v - entry.0).norm());
            }
        }
        Some(groups.values().map(|g| g.1).fold(0.0, f64::max))
    }
}

/// Assembles `U_n`, `T_n` and the frame bounds of `layer`.
pub fn assemble(basis: &Basis, layer: &Layer) -> Result<GramSystem> {
    layer.validate_for(basis)?;
    let dim = basis.dim(layer.n);
    let len = layer.len();
    let rows: Vec<Vec<Complex64>> = layer
        .nodes
        .par_iter()
        .zip(&layer.tau)
        .map(|(&x, &tau)| {
            let mut row = vec![Complex64::new(0.0, 0.0); dim];
            basis.fill_modes(x, &mut row);
            let s = tau.sqrt();
            row.iter_mut().for_each(|v| *v *= s);
            row
        })
        .collect();
    if let Some(index) = rows
        .iter()
        .position(|r| r.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())))
    {
        return Err(Error::NonFinite { index });
    }
    let u = DMatrix::from_fn(len, dim, |k, l| rows[k][l]);
    let mut t = u.ad_mul(&u);
    // symmetrise away rounding so the eigensolver sees an exactly Hermitian matrix
    for i in 0..dim {
        t[(i, i)].im = 0.0;
        for j in 0..i {
            let avg = (t[(i, j)] + t[(j, i)].conj()) * 0.5;
            t[(i, j)] = avg;
            t[(j, i)] = avg.conj();
        }
    }
    let (a_n, b_n) = hermitian_extremes(&t);
    Ok(GramSystem {
        basis: *basis,
        layer: layer.clone(),
        u,
        t,
        a_n,
        b_n,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameRow {
    pub n: usize,
    pub len: usize,
    pub lower: f64,
    pub upper: f64,
    pub kappa: f64,
    pub weight_sum: f64,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameReport {
    pub rows: Vec<FrameRow>,
    /// `min_n A_n`.
    pub lower: f64,
    /// `max_n B_n`.
    pub upper: f64,
    /// `max B_n / min A_n`, which dominates every `κ_n`.
    pub kappa: f64,
    pub floor: f64,
}

impl FrameReport {
    pub fn all_certified(&self) -> bool {
        self.rows.iter().all(|r| r.certified)
    }

    pub fn failing(&self) -> impl Iterator<Item = &FrameRow> {
        self.rows.iter().filter(|r| !r.certified)
    }
}

/// Per-layer and global frame bounds. Layers are assembled concurrently;
/// rows keep the input order.
pub fn frame_report(basis: &Basis, layers: &[Layer], floor: f64) -> Result<FrameReport> {
    if layers.is_empty() {
        return Err(Error::Config("frame report needs at least one layer".into()));
    }
    let rows = layers
        .par_iter()
        .enumerate()
        .map(|(index, layer)| {
            let gram = assemble(basis, layer).map_err(|e| Error::Layer {
                index,
                source: Box::new(e),
            })?;
            Ok(FrameRow {
                n: layer.n,
                len: layer.len(),
                lower: gram.a_n,
                upper: gram.b_n,
                kappa: gram.condition_number(),
                weight_sum: layer.weight_sum(),
                certified: gram.is_certified(floor),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lower = rows.iter().map(|r| r.lower).fold(f64::INFINITY, f64::min);
    let upper = rows.iter().map(|r| r.upper).fold(f64::NEG_INFINITY, f64::max);
    Ok(FrameReport {
        rows,
        lower,
        upper,
        kappa: condition(lower, upper),
        floor,
    })
}
