//! The frozen-boundaries process: `m` particles on [0, 1] with the first
//! pinned at 1 and the last at 0. Interior particle `i` jumps at rate
//! `Z_{i-1} - Z_i` to a uniform point of `(Z_i, Z_{i-1})`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{KernelError, WeightedSampler};
use crate::rng::{exp_holding, open01, unit};

/// Level `1/(2e)` that the penultimate particle must reach.
pub const FROZEN_THRESHOLD: f64 = 0.5 / std::f64::consts::E;

/// Positions are 0-based: `z[0] == 1`, `z[m-1] == 0`. Sampler slot `k`
/// carries the rate of interior particle `k + 1`.
#[derive(Debug, Clone)]
pub struct FrozenState {
    z: Vec<f64>,
    sampler: WeightedSampler,
    pub clock: f64,
}

impl FrozenState {
    /// Interior particles start at 0.
    pub fn new(m: usize) -> Result<Self, KernelError> {
        if m < 3 {
            return Err(KernelError::FrozenSize(m));
        }
        let mut z = vec![0.0; m];
        z[0] = 1.0;
        let mut w = vec![0.0; m - 2];
        w[0] = 1.0;
        Ok(Self { z, sampler: WeightedSampler::new(&w)?, clock: 0.0 })
    }

    pub fn m(&self) -> usize {
        self.z.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.z
    }

    /// Position of the last interior particle.
    pub fn penultimate(&self) -> f64 {
        self.z[self.z.len() - 2]
    }

    /// Total jump rate `1 - Z_{m-1}`.
    pub fn rate(&self) -> f64 {
        self.sampler.total()
    }

    /// Moves interior particle `p` (0-based, `1..=m-2`) to `x`, which must
    /// lie in `[z[p], z[p-1]]`.
    pub fn move_to(&mut self, p: usize, x: f64) {
        let m = self.z.len();
        debug_assert!(p >= 1 && p <= m - 2);
        let x = x.clamp(self.z[p], self.z[p - 1]);
        self.z[p] = x;
        self.sampler.update(p - 1, self.z[p - 1] - x).expect("ordered positions");
        if p < m - 2 {
            self.sampler.update(p, x - self.z[p + 1]).expect("ordered positions");
        }
    }

    /// Interior particle whose interval `(z[p], z[p-1])` contains `u`, if any.
    pub fn interval_containing(&self, u: f64) -> Option<usize> {
        let m = self.z.len();
        // Positions descend; the first index with z[p] < u.
        let p = self.z.partition_point(|&x| x >= u);
        (p >= 1 && p <= m - 2 && u < self.z[p - 1]).then_some(p)
    }

    /// Applies one jump chosen in proportion to the rates and returns the
    /// mover, or `None` once every interior particle has reached 1.
    pub fn jump<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        let slot = self.sampler.pick(unit(rng) * self.sampler.total()).ok()?;
        let p = slot + 1;
        let (lo, hi) = (self.z[p], self.z[p - 1]);
        self.move_to(p, lo + open01(rng) * (hi - lo));
        Some(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrozenOutcome {
    pub beta: f64,
    pub censored: bool,
    pub events: u64,
}

/// First time the penultimate particle reaches `1/(2e)`, censored at `t_cap`.
pub fn run_frozen_beta<R: Rng + ?Sized>(m: usize, rng: &mut R, t_cap: f64) -> Result<FrozenOutcome, KernelError> {
    let mut s = FrozenState::new(m)?;
    let mut events = 0;
    loop {
        let dt = exp_holding(rng, s.rate());
        if s.clock + dt > t_cap {
            return Ok(FrozenOutcome { beta: t_cap, censored: true, events });
        }
        s.clock += dt;
        if s.jump(rng).is_none() {
            return Ok(FrozenOutcome { beta: t_cap, censored: true, events });
        }
        events += 1;
        if s.penultimate() >= FROZEN_THRESHOLD {
            return Ok(FrozenOutcome { beta: s.clock, censored: false, events });
        }
    }
}
