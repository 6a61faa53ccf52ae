//! Independent brute-force oracles shared by the integration tests. None of
//! these routines call into the linear algebra used by the library.
#![allow(dead_code)]

use mzquad::basis::Basis;
use mzquad::mzfamily::Layer;
use mzquad::Complex64;
use nalgebra::{DMatrix, DVector};

pub type C = Complex64;

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Gram matrix by explicit summation over nodes.
pub fn brute_gram(basis: &Basis, nodes: &[f64], tau: &[f64], dim: usize) -> Vec<Vec<C>> {
    let mut t = vec![vec![c(0.0); dim]; dim];
    for (x, w) in nodes.iter().zip(tau) {
        let phi: Vec<C> = (1..=dim).map(|j| basis.eval(j, *x).unwrap()).collect();
        for i in 0..dim {
            for j in 0..dim {
                t[i][j] += phi[i].conj() * phi[j] * w;
            }
        }
    }
    t
}

/// Right-hand side `Σ_k τ_k conj(φ_i(x_k)) f(x_k)` by explicit summation.
pub fn brute_rhs(basis: &Basis, nodes: &[f64], tau: &[f64], samples: &[C], dim: usize) -> Vec<C> {
    (1..=dim)
        .map(|i| {
            nodes
                .iter()
                .zip(tau)
                .zip(samples)
                .map(|((x, w), s)| basis.eval(i, *x).unwrap().conj() * s * w)
                .sum()
        })
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Vec<C> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = vec![c(0.0); n];
    for row in (0..n).rev() {
        let s: C = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn matmul(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Characteristic polynomial coefficients `p(λ) = Σ_k coeffs[k] λ^k` of a
/// Hermitian matrix by the Faddeev–LeVerrier recursion.
pub fn char_poly(a: &[Vec<C>]) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![c(0.0); n + 1];
    coeffs[n] = c(1.0);
    let mut m = vec![vec![c(0.0); n]; n];
    for k in 1..=n {
        let mut next = matmul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += coeffs[n - k + 1];
        }
        m = next;
        let am = matmul(a, &m);
        let trace: C = (0..n).map(|i| am[i][i]).sum();
        coeffs[n - k] = -trace / k as f64;
    }
    coeffs.iter().map(|z| z.re).collect()
}

fn poly_eval(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &a in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// Newton iteration on a real-rooted polynomial. Started above the largest
/// root (or below the smallest) it converges monotonically to that root.
pub fn newton_root(coeffs: &[f64], mut x: f64) -> f64 {
    for _ in 0..500 {
        let (p, dp) = poly_eval(coeffs, x);
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// Smallest and largest eigenvalue of a positive semi-definite Hermitian
/// matrix from its characteristic polynomial.
pub fn brute_extremes(t: &[Vec<C>]) -> (f64, f64) {
    let p = char_poly(t);
    let trace: f64 = (0..t.len()).map(|i| t[i][i].re).sum();
    (newton_root(&p, -1.0), newton_root(&p, trace + 1.0))
}

/// Least-norm solution of `Σ_k v_k √τ_k φ_j(x_k) = δ_{j1}` by SVD, returned
/// as weights `w_k = √τ_k v_k`.
pub fn least_norm_weights(basis: &Basis, layer: &Layer) -> Vec<C> {
    let dim = basis.dim(layer.n());
    let len = layer.len();
    let m = DMatrix::from_fn(dim, len, |j, k| {
        basis.eval(j + 1, layer.nodes()[k]).unwrap() * layer.tau()[k].sqrt()
    });
    let mut rhs = DVector::from_element(dim, c(0.0));
    rhs[0] = c(1.0);
    let v = m.svd(true, true).solve(&rhs, 1e-14).unwrap();
    v.iter().zip(layer.tau()).map(|(v, t)| v * t.sqrt()).collect()
}
