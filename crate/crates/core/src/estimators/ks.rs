//! Kolmogorov–Smirnov statistics with asymptotic p-values.

use serde::{Deserialize, Serialize};

use super::EstimatorError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub d: f64,
    pub p: f64,
}

/// Minimum sample size for which a p-value is reported.
pub const KS_MIN_SAMPLES: usize = 8;

fn sorted_finite(samples: &[f64]) -> Result<Vec<f64>, EstimatorError> {
    if samples.is_empty() {
        return Err(EstimatorError::TooFewSamples { needed: 1, got: 0 });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(EstimatorError::NonFinite);
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sided one-sample statistic `sup |F_n - F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64, EstimatorError> {
    let v = sorted_finite(samples)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// One-sample test against a continuous CDF.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<KsResult, EstimatorError> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(EstimatorError::TooFewSamples { needed: KS_MIN_SAMPLES, got: samples.len() });
    }
    let d = ks_statistic(samples, cdf)?;
    Ok(KsResult { d, p: ks_p_value(d, samples.len() as f64) })
}

/// Two-sample test; the effective size is `n m / (n + m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, EstimatorError> {
    for s in [a, b] {
        if s.len() < KS_MIN_SAMPLES {
            return Err(EstimatorError::TooFewSamples { needed: KS_MIN_SAMPLES, got: s.len() });
        }
    }
    let (x, y) = (sorted_finite(a)?, sorted_finite(b)?);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(KsResult { d, p: ks_p_value(d, n * m / (n + m)) })
}

/// Asymptotic p-value with the usual small-sample correction to the argument.
pub fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let sn = n_eff.sqrt();
    kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Theta-function form converges fast for small arguments.
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (0..6).map(|k| ((2 * k + 1) as f64).powi(2)).map(|j2| (c * j2).exp()).sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        let mut sign = 1.0;
        for j in 1..=100 {
            let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
            s += sign * term;
            if term < 1e-17 {
                break;
            }
            sign = -sign;
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}
