//! Centered and scaled position profile of a single snapshot.

use super::EstimatorError;

/// `U(x) = (sum_{i=1}^{floor(n x) - 1} Y_i - n x) / sqrt(n)` for each grid
/// point, where `n` is the particle count.
pub fn fclt_profile(gaps: &[f64], x_grid: &[f64]) -> Result<Vec<f64>, EstimatorError> {
    let n = gaps.len() + 1;
    let nf = n as f64;
    let mut prefix = Vec::with_capacity(n);
    prefix.push(0.0);
    let mut acc = 0.0;
    for g in gaps {
        acc += g;
        prefix.push(acc);
    }
    x_grid
        .iter()
        .map(|&x| {
            let k = (nf * x).floor();
            if !(x > 0.0 && x <= 1.0) || k < 1.0 {
                return Err(EstimatorError::InvalidArgument(format!(
                    "grid point {x} gives floor(n x) < 1 or lies outside (0, 1]"
                )));
            }
            Ok((prefix[k as usize - 1] - nf * x) / nf.sqrt())
        })
        .collect()
}
