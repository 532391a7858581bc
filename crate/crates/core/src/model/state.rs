use serde::{Deserialize, Serialize};

use super::ModelError;

/// Leader position plus the gap vector `Y_i = X_i - X_{i+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub leader_pos: f64,
    pub gaps: Vec<f64>,
    pub clock: f64,
}

impl SystemState {
    /// State with the leader at the origin and clock zero.
    pub fn new(gaps: Vec<f64>) -> Result<Self, ModelError> {
        Self::with_leader(0.0, gaps)
    }

    pub fn with_leader(leader_pos: f64, gaps: Vec<f64>) -> Result<Self, ModelError> {
        if gaps.is_empty() {
            return Err(ModelError::InvalidState("need at least two particles".into()));
        }
        if let Some(g) = gaps.iter().find(|g| !g.is_finite() || **g < 0.0) {
            return Err(ModelError::InvalidState(format!("gap {g} is not a finite nonnegative number")));
        }
        if !leader_pos.is_finite() {
            return Err(ModelError::InvalidState("leader position must be finite".into()));
        }
        Ok(Self { leader_pos, gaps, clock: 0.0 })
    }

    /// All gaps zero: every particle at the origin.
    pub fn zeros(n: usize) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::InvalidState(format!("n must be at least 2, got {n}")));
        }
        Self::new(vec![0.0; n - 1])
    }

    /// Number of particles.
    pub fn n(&self) -> usize {
        self.gaps.len() + 1
    }

    /// Particle positions `X_1 >= X_2 >= ... >= X_n`.
    pub fn positions(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n());
        let mut x = self.leader_pos;
        out.push(x);
        for g in &self.gaps {
            x -= g;
            out.push(x);
        }
        out
    }

    pub fn total_rate(&self) -> f64 {
        total_rate(&self.gaps)
    }
}

/// Total jump rate `1 + sum of gaps`: the leader at rate one plus follower
/// `i+1` at rate `Y_i`.
pub fn total_rate(gaps: &[f64]) -> f64 {
    1.0 + gaps.iter().sum::<f64>()
}

/// Divides every gap by `lambda`, mapping rate-one exponential gaps to
/// rate-`lambda` ones.
pub fn rescale_gaps(gaps: &[f64], lambda: f64) -> Result<Vec<f64>, ModelError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(ModelError::InvalidArgument(format!("rate must be positive, got {lambda}")));
    }
    Ok(gaps.iter().map(|g| g / lambda).collect())
}
