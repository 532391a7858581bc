//! Sample moments with normal-approximation intervals.

use serde::{Deserialize, Serialize};

use super::{EstimatorError, Z95};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanVar {
    pub mean: f64,
    /// Unbiased sample variance; zero for a single sample.
    pub var: f64,
    pub count: usize,
}

impl MeanVar {
    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        (self.var / self.count as f64).sqrt()
    }
}

/// Welford mean and variance.
pub fn mean_var(samples: &[f64]) -> MeanVar {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, x) in samples.iter().enumerate() {
        let d = x - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (x - mean);
    }
    let var = if samples.len() > 1 { m2 / (samples.len() - 1) as f64 } else { 0.0 };
    MeanVar { mean, var, count: samples.len() }
}

/// Sample covariance of paired data.
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return 0.0;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    a[..n].iter().zip(&b[..n]).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (n - 1) as f64
}

/// Mean of `X^p` with a 95% half width `1.96 sd / sqrt(N)`. The normal
/// approximation is only meaningful for a few dozen samples or more.
pub fn moment_ci(samples: &[f64], p: f64) -> Result<(f64, f64), EstimatorError> {
    if samples.is_empty() {
        return Err(EstimatorError::TooFewSamples { needed: 1, got: 0 });
    }
    let pw: Vec<f64> = samples.iter().map(|x| x.powf(p)).collect();
    if pw.iter().any(|v| !v.is_finite()) {
        return Err(EstimatorError::NonFinite);
    }
    let mv = mean_var(&pw);
    Ok((mv.mean, Z95 * mv.se()))
}
