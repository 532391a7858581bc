//! Closed-form action of the gap-process generator on a fixed family of
//! observables.
//!
//! Indices are 1-based to match the usual `y_1..y_{n-1}` labelling: gap `i`
//! lives at `gaps[i - 1]`.

use serde::{Deserialize, Serialize};

use super::{JumpLaw, ModelError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    /// `y_i`.
    Coordinate { i: usize },
    /// `y_1 + ... + y_{n-1}`.
    GapSum,
    /// `1 + sum_i alpha^i y_i`.
    Lyapunov { alpha: f64 },
    /// `y_i^k`.
    Power { i: usize, k: u32 },
}

impl Observable {
    pub fn validate(&self, gap_count: usize) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidObservable(msg));
        match *self {
            Observable::Coordinate { i } | Observable::Power { i, .. }
                if i == 0 || i > gap_count =>
            {
                bad(format!("index {i} outside 1..={gap_count}"))
            }
            Observable::Power { k: 0, .. } => bad("power exponent must be at least 1".into()),
            Observable::Lyapunov { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                bad(format!("Lyapunov parameter {alpha} outside (0,1)"))
            }
            _ => Ok(()),
        }
    }

    /// Polynomial degree in `y`; used for bias allowances.
    pub fn degree(&self) -> u32 {
        match *self {
            Observable::Power { k, .. } => k,
            _ => 1,
        }
    }
}

/// Evaluates the observable at a gap vector.
pub fn observable_value(gaps: &[f64], obs: Observable) -> Result<f64, ModelError> {
    obs.validate(gaps.len())?;
    Ok(match obs {
        Observable::Coordinate { i } => gaps[i - 1],
        Observable::GapSum => gaps.iter().sum(),
        Observable::Lyapunov { alpha } => {
            1.0 + gaps.iter().enumerate().map(|(j, y)| alpha.powi(j as i32 + 1) * y).sum::<f64>()
        }
        Observable::Power { i, k } => gaps[i - 1].powi(k as i32),
    })
}

/// Exact value of the generator applied to `obs` at `gaps`.
///
/// `Power { i: 1, k }` needs the first `k` moments of the jump law in closed
/// form and fails with [`ModelError::Unsupported`] otherwise.
pub fn generator_apply(gaps: &[f64], obs: Observable, law: &JumpLaw) -> Result<f64, ModelError> {
    obs.validate(gaps.len())?;
    let last = gaps.len();
    let y = |i: usize| gaps[i - 1];
    Ok(match obs {
        Observable::Coordinate { i: 1 } => 1.0 - y(1) * y(1) / 2.0,
        Observable::Coordinate { i } => (y(i - 1) * y(i - 1) - y(i) * y(i)) / 2.0,
        Observable::GapSum => 1.0 - y(last) * y(last) / 2.0,
        Observable::Lyapunov { alpha } => {
            // Written as alpha - (sum of (1-alpha)/2 alpha^i y_i^2 + alpha^n/2 y_{n-1}^2)
            // so that dropping the last term gives an upper bound in floating
            // point as well as exactly.
            let half = (1.0 - alpha) / 2.0;
            let mut s = 0.0;
            for i in 1..=last {
                s += half * alpha.powi(i as i32) * (y(i) * y(i));
            }
            let tail = alpha.powi(last as i32 + 1) / 2.0 * (y(last) * y(last));
            alpha - (s + tail)
        }
        Observable::Power { i: 1, k } => {
            let y1 = y(1);
            let mut gain = 0.0;
            for j in 1..=k {
                let mu = law.moment(j).ok_or_else(|| {
                    ModelError::Unsupported(format!("jump law has no finite moment of order {j}"))
                })?;
                gain += binomial(k, j) * y1.powi((k - j) as i32) * mu;
            }
            gain - f64::from(k) / f64::from(k + 1) * y1.powi(k as i32 + 1)
        }
        Observable::Power { i, k } => {
            let (yi, yp) = (y(i), y(i - 1));
            let loss = -f64::from(k) / f64::from(k + 1) * yi.powi(k as i32 + 1);
            let mut gain = 0.0;
            for j in 1..=k {
                gain += binomial(k, j) * yi.powi((k - j) as i32) * yp.powi(j as i32 + 1)
                    / f64::from(j + 1);
            }
            loss + gain
        }
    })
}

fn binomial(k: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, t| acc * f64::from(k - t) / f64::from(t + 1))
}
