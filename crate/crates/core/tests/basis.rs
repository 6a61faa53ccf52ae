use std::f64::consts::PI;

use mzquad::basis::{bessel_partial_sum, error_function_phi, Basis, Family, PhiOptions};
use mzquad::{Complex64, Error};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::Fourier),
        Just(Family::Chebyshev),
        Just(Family::Legendre)
    ]
}

/// A point strictly inside the domain from a unit draw.
fn point(basis: &Basis, u: f64) -> f64 {
    let (lo, hi) = basis.domain();
    lo + (hi - lo) * u
}

#[test]
fn orthonormal_up_to_level_32() {
    for family in Family::ALL {
        let b = Basis::new(family);
        let dim = b.dim(32);
        let rule = b.reference_rule(32);
        let modes: Vec<Vec<Complex64>> = rule.iter().map(|(x, _)| b.eval_modes(dim, *x).unwrap()).collect();
        let mut worst: f64 = 0.0;
        for j in 0..dim {
            for jp in 0..dim {
                let ip: Complex64 = rule
                    .iter()
                    .zip(&modes)
                    .map(|((_, w), m)| m[j] * m[jp].conj() * w)
                    .sum();
                let target = if j == jp { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).norm());
            }
        }
        assert!(worst < 1e-10, "{family}: {worst:e}");
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn inner_product_helper_agrees() {
    for family in Family::ALL {
        let b = Basis::new(family);
        assert!((b.inner_product(3, 3).unwrap() - 1.0).norm() < 1e-12);
        assert!(b.inner_product(2, 5).unwrap().norm() < 1e-12);
    }
}

#[test]
fn chebyshev_and_legendre_closed_forms() {
    // √2 cos(k arccos x) and √(2k+1) P_k(x) from explicit polynomials
    let cheb = Basis::chebyshev();
    let leg = Basis::legendre();
    for &x in &[-1.0, -0.7, -0.1, 0.0, 0.33, 0.9, 1.0] {
        let t3 = 4.0 * x * x * x - 3.0 * x;
        assert!((cheb.eval(4, x).unwrap().re - 2f64.sqrt() * t3).abs() < 1e-13);
        let p3 = (5.0 * x * x * x - 3.0 * x) / 2.0;
        assert!((leg.eval(4, x).unwrap().re - 7f64.sqrt() * p3).abs() < 1e-13);
        let p4 = (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0;
        assert!((leg.eval(5, x).unwrap().re - 3.0 * p4).abs() < 1e-13);
    }
}

#[test]
fn spectral_function_at_endpoints() {
    for n in [0usize, 1, 5, 17] {
        let nf = n as f64;
        let leg = Basis::legendre().spectral_function(n, 1.0).unwrap();
        assert!((leg - (nf + 1.0) * (nf + 1.0)).abs() < 1e-9 * leg);
        let cheb = Basis::chebyshev().spectral_function(n, -1.0).unwrap();
        assert!((cheb - (2.0 * nf + 1.0)).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_reproduces_polynomials(
        family in family(),
        n in 0usize..=16,
        u in 0.01f64..0.99,
        seed in prop::collection::vec(-1.0f64..1.0, 66),
    ) {
        let b = Basis::new(family);
        let dim = b.dim(n);
        let a: Vec<Complex64> = (0..dim).map(|i| Complex64::new(seed[2 * i], seed[2 * i + 1])).collect();
        let x = point(&b, u);
        let px: Complex64 = b.eval_modes(dim, x).unwrap().iter().zip(&a).map(|(p, c)| p * c).sum();
        // ⟨p, k_x⟩ with the reference integrator
        let ip: Complex64 = b
            .reference_rule(2 * n + 1)
            .iter()
            .map(|&(y, w)| {
                let py: Complex64 = b.eval_modes(dim, y).unwrap().iter().zip(&a).map(|(p, c)| p * c).sum();
                py * b.reproducing_kernel(n, x, y).unwrap().conj() * w
            })
            .sum();
        prop_assert!((ip - px).norm() < 1e-10 * (1.0 + px.norm()), "{} vs {}", ip, px);
    }

    #[test]
    fn dirichlet_closed_form(n in 0usize..=64, x in -0.5f64..0.5, y in -0.5f64..0.5) {
        let k = Basis::fourier().reproducing_kernel(n, x, y).unwrap();
        let d = y - x;
        let closed = if (d - d.round()).abs() < 1e-12 {
            (2 * n + 1) as f64
        } else {
            ((2 * n + 1) as f64 * PI * d).sin() / (PI * d).sin()
        };
        prop_assert!(k.im.abs() < 1e-9 * (2 * n + 1) as f64);
        prop_assert!((k.re - closed).abs() <= 1e-9 * closed.abs().max(1.0), "{} vs {}", k.re, closed);
    }

    #[test]
    fn spectral_function_is_kernel_diagonal(family in family(), n in 0usize..=20, u in 0.0f64..1.0) {
        let b = Basis::new(family);
        let x = point(&b, u);
        let s = b.spectral_function(n, x).unwrap();
        let k = b.reproducing_kernel(n, x, x).unwrap();
        prop_assert!(s >= 1.0 - 1e-12);
        prop_assert!((s - k.re).abs() < 1e-10 * s && k.im.abs() < 1e-10 * s);
    }
}

#[test]
fn remainder_function_decays_strictly() {
    for family in Family::ALL {
        let b = Basis::new(family);
        let sigma = b.critical_sigma() + 0.2;
        let opts = PhiOptions::default();
        let profiles: Vec<_> = [4usize, 8, 16, 32, 64, 128]
            .iter()
            .map(|&n| error_function_phi(&b, sigma, n, &opts).unwrap())
            .collect();
        for w in profiles.windows(2) {
            assert!(w[1].upper() < w[0].value, "{family}: n = {} -> {}", w[0].n, w[1].n);
        }
    }
}

#[test]
fn critical_exponent_dichotomy_on_torus() {
    let b = Basis::fourier();
    // below the critical exponent the partial sums keep growing, with
    // increments over dyadic blocks that grow as well
    let sums: Vec<f64> = (8..=18)
        .map(|m| bessel_partial_sum(&b, 0.4, 1 << m, 0.0).unwrap())
        .collect();
    for w in sums.windows(3) {
        assert!(w[2] - w[1] > w[1] - w[0]);
    }
    assert!(matches!(
        error_function_phi(&b, 0.4, 0, &PhiOptions::default()),
        Err(Error::Divergent { .. })
    ));
    // above it, every later partial sum (without the constant mode) stays
    // inside the certified bracket
    let opts = PhiOptions {
        lambda_max: Some(1 << 10),
        tolerance: None,
        ..PhiOptions::default()
    };
    let profile = error_function_phi(&b, 0.6, 0, &opts).unwrap();
    for m in [12, 16, 20] {
        let s = bessel_partial_sum(&b, 0.6, 1 << m, 0.0).unwrap() - 1.0;
        assert!(s <= profile.upper().powi(2), "2^{m}");
        assert!(s >= profile.partial.powi(2) * (1.0 - 1e-12), "2^{m}");
    }
}
