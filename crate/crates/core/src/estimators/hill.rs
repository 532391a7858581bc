//! Hill estimator of a power-law tail index.

use serde::{Deserialize, Serialize};

use super::EstimatorError;

/// z-quantile used for one-sided 95% bounds.
pub const Z_ONE_SIDED_95: f64 = 1.644_853_626_951_472_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillEstimate {
    pub alpha: f64,
    pub k: usize,
    /// Top order statistics were all equal, so the estimate is infinite.
    pub unbounded: bool,
}

impl HillEstimate {
    /// One-sided 95% lower bound from the asymptotic normal law
    /// `alpha_hat ~ N(alpha, alpha^2 / k)`.
    pub fn lower_95(&self) -> f64 {
        self.alpha * (1.0 - Z_ONE_SIDED_95 / (self.k as f64).sqrt())
    }
}

/// `k / sum_{i<=k} ln(X_(i) / X_(k+1))` over descending order statistics.
pub fn hill_estimator(samples: &[f64], k: usize) -> Result<HillEstimate, EstimatorError> {
    if k == 0 || k >= samples.len() {
        return Err(EstimatorError::InvalidArgument(format!(
            "k must lie in 1..{}, got {k}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(EstimatorError::InvalidArgument("samples must be positive and finite".into()));
    }
    let mut v = samples.to_vec();
    // Only the top k+1 matter.
    let (_, pivot, _) = v.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
    let threshold = *pivot;
    let s: f64 = v[..k].iter().map(|x| (x / threshold).ln()).sum();
    if s == 0.0 {
        return Ok(HillEstimate { alpha: f64::INFINITY, k, unbounded: true });
    }
    Ok(HillEstimate { alpha: k as f64 / s, k, unbounded: false })
}

/// `k` as a fraction of the sample size, at least 1.
pub fn k_from_fraction(len: usize, fraction: f64) -> usize {
    ((len as f64 * fraction).round() as usize).clamp(1, len.saturating_sub(1).max(1))
}
