//! Least-squares power-law fits on log-log axes.

use serde::{Deserialize, Serialize};

use super::EstimatorError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Standard error of the exponent; NaN with only two points.
    pub exponent_se: f64,
}

/// Fits `y = c x^a` by ordinary least squares on `(ln x, ln y)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit, EstimatorError> {
    if xs.len() != ys.len() {
        return Err(EstimatorError::InvalidArgument("xs and ys differ in length".into()));
    }
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(EstimatorError::InvalidArgument("power-law data must be positive".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if lx.len() < 2 || sxx == 0.0 {
        return Err(EstimatorError::InvalidArgument("need at least two distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    let exponent_se = if lx.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok(PowerFit { exponent: slope, prefactor: icpt.exp(), exponent_se })
}
