//! Least-squares power-law fits on log–log axes.

use num_traits::Float;

use crate::error::{Error, Result};

/// Ordinary least squares fit of `ln D = intercept + slope · ln R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero for an exact power law.
    pub stderr: f64,
    pub points: usize,
}

impl LogLogFit {
    /// Fitted value of `D` at abscissa `r`.
    pub fn predict(&self, r: f64) -> f64 {
        (self.intercept + self.slope * r.ln()).exp()
    }
}

pub const MIN_POINTS: usize = 4;

pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < MIN_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_POINTS, got: points.len() });
    }
    if points.iter().any(|&(r, d)| !(r > 0.0 && d > 0.0 && r.is_finite() && d.is_finite())) {
        return Err(Error::InvalidParameter { name: "points", reason: "log-log fit needs positive finite values" });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0.ln()).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(sxx, sxy), &(r, d)| {
        let dx = r.ln() - mean_x;
        (sxx + dx * dx, sxy + dx * (d.ln() - mean_y))
    });
    if sxx <= f64::EPSILON * n * (1.0 + mean_x * mean_x) {
        return Err(Error::DegenerateAbscissae);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = points
        .iter()
        .map(|&(r, d)| {
            let e = d.ln() - intercept - slope * r.ln();
            e * e
        })
        .sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(LogLogFit { slope, intercept, stderr, points: points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn exact_power_laws() {
        let pts: Vec<_> = [1.0, 2.0, 5.0, 10.0, 100.0].iter().map(|&r: &f64| (r, 7.0 / r)).collect();
        let fit = fit_loglog_slope(&pts).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!((fit.intercept - 7.0_f64.ln()).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);

        let pts: Vec<_> = [3.0, 30.0, 300.0, 3000.0].iter().map(|&r: &f64| (r, r.powi(-2))).collect();
        assert!((fit_loglog_slope(&pts).unwrap().slope + 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fit_loglog_slope(&[(1.0, 1.0); 3]), Err(Error::TooFewPoints { .. })));
        assert_eq!(fit_loglog_slope(&[(2.0, 1.0), (2.0, 3.0), (2.0, 4.0), (2.0, 5.0)]), Err(Error::DegenerateAbscissae));
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, -3.0), (3.0, 4.0), (4.0, 5.0)]).is_err());
    }
}
