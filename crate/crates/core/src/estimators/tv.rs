//! Total-variation surrogates: the distinguishing-statistic lower bound and
//! Wilson intervals for coupling tails.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// `1 - 4 / (4 + r^2)` with `r = |mean_a - mean_b| / sqrt((var_a + var_b) / 2)`.
///
/// Equal means give 0. Distinct means with both variances zero give 1.
pub fn tv_lower_bound(mean_a: f64, mean_b: f64, var_a: f64, var_b: f64) -> f64 {
    let gap = (mean_a - mean_b).abs();
    if gap == 0.0 {
        return 0.0;
    }
    let pooled = (var_a.max(0.0) + var_b.max(0.0)) / 2.0;
    if pooled == 0.0 {
        return 1.0;
    }
    let r2 = gap * gap / pooled;
    r2 / (4.0 + r2)
}

/// Empirical tail probability with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicas: u64,
}

impl TailEstimate {
    pub fn from_counts(hits: u64, replicas: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(hits, replicas, Z95);
        let p_hat = if replicas == 0 { 0.0 } else { hits as f64 / replicas as f64 };
        Self { p_hat, ci_low: ci_low.min(p_hat), ci_high: ci_high.max(p_hat), replicas }
    }
}

pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_from_seed, unit};
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(tv_lower_bound(0.0, 2.0, 1.0, 1.0), 0.5);
        assert_eq!(tv_lower_bound(3.0, 3.0, 1.0, 2.0), 0.0);
        let b = tv_lower_bound(15.0, 30.0, 15.0, 15.0);
        assert!((b - 15.0 / 19.0).abs() < 1e-15);
        assert_eq!(tv_lower_bound(0.0, 1.0, 0.0, 0.0), 1.0);
    }

    #[test]
    fn wilson_coverage() {
        let mut rng = stream_from_seed(4);
        let (p, n) = (0.2, 200u64);
        let trials = 1000;
        let covered = (0..trials)
            .filter(|_| {
                let hits = (0..n).filter(|_| unit(&mut rng) < p).count() as u64;
                let t = TailEstimate::from_counts(hits, n);
                t.ci_low <= p && p <= t.ci_high
            })
            .count();
        assert!(covered as f64 >= 0.93 * trials as f64, "{covered}");
    }

    proptest! {
        #[test]
        fn wilson_contains_p_hat(hits in 0u64..500, extra in 0u64..500) {
            let t = TailEstimate::from_counts(hits, hits + extra + 1);
            prop_assert!(t.ci_low <= t.p_hat && t.p_hat <= t.ci_high);
            prop_assert!(t.ci_low >= 0.0 && t.ci_high <= 1.0);
        }

        #[test]
        fn monotone_in_separation_and_variance(
            d in 0.01f64..50.0, extra in 0.01f64..10.0,
            va in 0.01f64..20.0, vb in 0.01f64..20.0, dv in 0.01f64..10.0,
        ) {
            let base = tv_lower_bound(0.0, d, va, vb);
            prop_assert!(tv_lower_bound(0.0, d + extra, va, vb) >= base);
            prop_assert!(tv_lower_bound(0.0, d, va + dv, vb) <= base);
            prop_assert!(tv_lower_bound(0.0, d, va, vb + dv) <= base);
            prop_assert!((0.0..1.0).contains(&base));
        }
    }
}
