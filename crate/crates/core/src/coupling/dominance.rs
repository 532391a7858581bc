//! Shared-uniform thinning coupling of a follow-the-leader system `X` with
//! the frozen-boundaries process `Z`.
//!
//! Events arrive at rate `X_1(t)`. Each draws `U` uniform on `(0, X_1)`.
//! The `X` follower whose interval `(X_p, X_{p-1})` contains `U` moves to
//! `U`, and so does the interior `Z` particle whose interval contains `U`
//! (which requires `Z_{m-1} < U < 1`). Marginally each system has its own
//! law; jointly `Z_j <= X_j` is preserved when `X` starts with `X_1 >= 1`
//! and `X_m = 0` above `Z`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::kernel::{FrozenState, KernelError};
use crate::model::ModelError;
use crate::rng::{exp_holding, open01, unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderPath {
    /// `X_1` never moves.
    Frozen,
    /// `X_1` jumps at rate one by unit exponential amounts.
    ExpUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceViolation {
    pub time: f64,
    /// 1-based particle index.
    pub index: usize,
    pub z: f64,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceOutcome {
    pub ok: bool,
    pub violation: Option<DominanceViolation>,
    pub events: u64,
    /// `Z_{m-1}` at the end of the run (or at the violation).
    pub z_penultimate: f64,
    pub x_final: Vec<f64>,
}

/// Random start with `X_1 = 1 + Exp(1)`, `X_m = 0` and interior particles
/// uniform on `(0, X_1)`, sorted.
pub fn sample_start<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    let x1 = 1.0 + exp_holding(rng, 1.0);
    let mut x: Vec<f64> = (0..m.saturating_sub(2)).map(|_| unit(rng) * x1).collect();
    x.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::with_capacity(m);
    out.push(x1);
    out.extend(x);
    out.push(0.0);
    out
}

fn first_violation(z: &[f64], x: &[f64], time: f64) -> Option<DominanceViolation> {
    z.iter()
        .zip(x)
        .position(|(a, b)| a > b)
        .map(|j| DominanceViolation { time, index: j + 1, z: z[j], x: x[j] })
}

pub fn dominance_run<R: Rng + ?Sized>(
    x0: &[f64],
    leader: LeaderPath,
    t_end: f64,
    rng: &mut R,
) -> Result<DominanceOutcome, KernelError> {
    let m = x0.len();
    let mut z = FrozenState::new(m)?;
    if !(x0[0] >= 1.0) || x0[m - 1] != 0.0 || x0.windows(2).any(|w| w[0] < w[1]) {
        return Err(ModelError::InvalidState(
            "start must be ordered with X_1 >= 1 and X_m = 0".into(),
        )
        .into());
    }
    let mut x = x0.to_vec();
    let leader_rate = match leader {
        LeaderPath::Frozen => 0.0,
        LeaderPath::ExpUnit => 1.0,
    };
    let mut clock = 0.0;
    let mut events = 0;
    let finish = |ok, violation, events, z: &FrozenState, x: Vec<f64>| DominanceOutcome {
        ok,
        violation,
        events,
        z_penultimate: z.penultimate(),
        x_final: x,
    };
    if let Some(v) = first_violation(z.positions(), &x, 0.0) {
        return Ok(finish(false, Some(v), 0, &z, x));
    }
    loop {
        let rate = x[0] + leader_rate;
        let dt = exp_holding(rng, rate);
        if clock + dt > t_end {
            break;
        }
        clock += dt;
        events += 1;
        let pick = unit(rng) * rate;
        if pick >= x[0] {
            x[0] += -(-open01(rng)).ln_1p();
        } else {
            let u = open01(rng) * x[0];
            let p = x.partition_point(|&v| v >= u);
            if p >= 1 && p < m {
                x[p] = u;
            }
            if let Some(q) = z.interval_containing(u) {
                z.move_to(q, u);
            }
        }
        if let Some(v) = first_violation(z.positions(), &x, clock) {
            return Ok(finish(false, Some(v), events, &z, x));
        }
    }
    Ok(finish(true, None, events, &z, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from_seed;

    #[test]
    fn zero_horizon_is_ok() {
        let mut rng = stream_from_seed(1);
        let x0 = sample_start(8, &mut rng);
        let out = dominance_run(&x0, LeaderPath::Frozen, 0.0, &mut rng).unwrap();
        assert!(out.ok && out.events == 0);
    }

    #[test]
    fn bad_start_rejected() {
        let mut rng = stream_from_seed(2);
        assert!(dominance_run(&[0.5, 0.2, 0.0], LeaderPath::Frozen, 1.0, &mut rng).is_err());
        assert!(dominance_run(&[1.0, 0.2, 0.1], LeaderPath::Frozen, 1.0, &mut rng).is_err());
        assert!(dominance_run(&[1.0, 0.0], LeaderPath::Frozen, 1.0, &mut rng).is_err());
    }

    #[test]
    fn short_runs_hold() {
        let mut rng = stream_from_seed(3);
        for leader in [LeaderPath::Frozen, LeaderPath::ExpUnit] {
            for _ in 0..50 {
                let x0 = sample_start(6, &mut rng);
                let out = dominance_run(&x0, leader, 20.0, &mut rng).unwrap();
                assert!(out.ok, "{:?}", out.violation);
                assert!(out.x_final.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }
}
