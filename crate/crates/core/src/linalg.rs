//! Dense Hermitian helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Largest dimension handled by the dense eigensolver; above it the extreme
/// eigenvalues come from power iteration.
pub const DENSE_EIGEN_LIMIT: usize = 512;
const POWER_TOLERANCE: f64 = 1e-10;

/// Smallest and largest eigenvalue of a Hermitian positive semi-definite matrix.
pub fn hermitian_extremes(t: &DMatrix<Complex64>) -> (f64, f64) {
    let dim = t.nrows();
    if dim == 0 {
        return (0.0, 0.0);
    }
    if dim <= DENSE_EIGEN_LIMIT {
        let eig = SymmetricEigen::new(t.clone());
        let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    } else {
        let hi = power_iteration(t, 0.0);
        let shifted = hi - power_iteration(t, hi);
        (shifted.min(hi), hi)
    }
}

/// Dominant eigenvalue of `shift·I - t` when `shift > 0`, or of `t` when
/// `shift == 0`, by power iteration with a Rayleigh-quotient stop test.
/// Returns the eigenvalue of the iterated operator.
fn power_iteration(t: &DMatrix<Complex64>, shift: f64) -> f64 {
    let dim = t.nrows();
    let apply = |v: &DVector<Complex64>| -> DVector<Complex64> {
        let tv = t * v;
        if shift == 0.0 {
            tv
        } else {
            v * Complex64::new(shift, 0.0) - tv
        }
    };
    // deterministic start vector with no special structure
    let mut v = DVector::from_fn(dim, |i, _| {
        let s = (i as f64 + 1.0) * 0.618_033_988_749_895;
        Complex64::new(1.0 + (s - s.floor()), 0.5 - (1.7 * s).fract())
    });
    v /= Complex64::new(v.norm(), 0.0);
    let mut estimate = 0.0;
    let scale = t.norm().max(f64::MIN_POSITIVE);
    for _ in 0..10 * dim {
        let w = apply(&v);
        let rayleigh = v.dotc(&w).re;
        let norm = w.norm();
        if norm <= 1e-15 * scale {
            return rayleigh.max(0.0);
        }
        // the Rayleigh error is quadratic in the residual, so a residual of
        // √tol together with a stalled estimate pins the eigenvalue to ~tol
        let residual = (&w - &v * Complex64::new(rayleigh, 0.0)).norm();
        let converged = (rayleigh - estimate).abs() <= POWER_TOLERANCE * rayleigh.abs()
            && residual <= POWER_TOLERANCE.sqrt() * rayleigh.abs();
        estimate = rayleigh;
        v = w / Complex64::new(norm, 0.0);
        if converged {
            break;
        }
    }
    estimate
}

/// Solves `t x = b` for Hermitian positive-definite `t`. Returns `None` when
/// the Cholesky factorisation fails or meets a non-positive pivot.
pub fn hpd_solve(t: &DMatrix<Complex64>, b: &DVector<Complex64>) -> Option<DVector<Complex64>> {
    let chol = t.clone().cholesky()?;
    // complex square roots never fail, so pivots are checked explicitly
    let positive = chol
        .l_dirty()
        .diagonal()
        .iter()
        .all(|d| d.re > 0.0 && d.im.abs() <= 1e-8 * d.re);
    positive.then(|| chol.solve(b))
}
