//! Ordinary least-squares line fits used for growth exponents and
//! convergence rates.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual of the fitted points.
    pub max_residual: f64,
    pub points: usize,
}

impl LineFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Fits `y ≈ intercept + slope · x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::Shape {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let count = xs.len();
    if count < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: count,
        });
    }
    let nf = count as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: 1,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(LineFit {
        slope,
        intercept,
        max_residual,
        points: count,
    })
}

/// Slope of `ln err` against `ln n`, dropping rows with `err` below `floor`.
pub fn algebraic_rate(degrees: &[usize], errors: &[f64], floor: f64) -> Result<LineFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = degrees
        .iter()
        .zip(errors)
        .filter(|(_, e)| e.is_finite() && **e > floor)
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .unzip();
    fit_line(&xs, &ys)
}

/// Slope of `log10 err` against `n`, dropping rows with `err` below `floor`.
pub fn geometric_rate(degrees: &[usize], errors: &[f64], floor: f64) -> Result<LineFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = degrees
        .iter()
        .zip(errors)
        .filter(|(_, e)| e.is_finite() && **e > floor)
        .map(|(&n, &e)| (n as f64, e.log10()))
        .unzip();
    fit_line(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_power_law() {
        let degrees = [8, 16, 32, 64];
        let errors: Vec<f64> = degrees.iter().map(|&n| 3.0 * (n as f64).powf(-1.25)).collect();
        let fit = algebraic_rate(&degrees, &errors, 1e-13).unwrap();
        assert_abs_diff_eq!(fit.slope, -1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept.exp(), 3.0, epsilon = 1e-10);
        assert!(fit.max_residual < 1e-12);
    }

    #[test]
    fn geometric_with_floor() {
        let degrees: Vec<usize> = (1..=30).map(|i| 4 * i).collect();
        let errors: Vec<f64> = degrees
            .iter()
            .map(|&n| (0.5f64.powi(n as i32)).max(1e-16))
            .collect();
        let fit = geometric_rate(&degrees, &errors, 1e-13).unwrap();
        assert_abs_diff_eq!(fit.slope, -std::f64::consts::LOG10_2, epsilon = 1e-12);
        assert!(fit.points < degrees.len());
    }

    #[test]
    fn too_few_points() {
        assert!(fit_line(&[1.0], &[2.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0]).is_err());
    }
}
