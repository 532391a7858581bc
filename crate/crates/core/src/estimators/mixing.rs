//! Mixing-time estimates from the two total-variation surrogates.
//!
//! Lower: the gap sum started from `(1 - delta) * 1` is compared with its
//! stationary mean and variance, both `n - 1`, through [`tv_lower_bound`].
//! Upper: the probability that the prefix coupling against a stationary
//! start has not completed by `t`, maximised over the tested starts.
//!
//! Both use unit exponential leader jumps, the case with a known product
//! stationary law.

use serde::{Deserialize, Serialize};

use super::{mean_var, tv_lower_bound, EstimatorError, MeanVar, TailEstimate};
use crate::coupling::{run_coupling, sample_stationary_gaps};
use crate::kernel::{NullObserver, Simulator};
use crate::model::{JumpLaw, SystemState};
use crate::rng::{par_replicas, replica_seed, stream_from_seed, Role};

/// The mixing threshold.
pub const QUARTER: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitKind {
    Zeros,
    /// Every gap equal to `scale`.
    Spread { scale: f64 },
    Custom { gaps: Vec<f64> },
}

impl InitKind {
    pub fn gaps(&self, n: usize) -> Result<Vec<f64>, EstimatorError> {
        match self {
            InitKind::Zeros => Ok(vec![0.0; n - 1]),
            InitKind::Spread { scale } => Ok(vec![*scale; n - 1]),
            InitKind::Custom { gaps } if gaps.len() == n - 1 => Ok(gaps.clone()),
            InitKind::Custom { gaps } => Err(EstimatorError::InvalidArgument(format!(
                "custom start has {} gaps, expected {}",
                gaps.len(),
                n - 1
            ))),
        }
    }

    fn tag(&self) -> u64 {
        match self {
            InitKind::Zeros => 0,
            InitKind::Spread { .. } => 1,
            InitKind::Custom { .. } => 2,
        }
    }
}

/// One coupling run. `replica_seed` alone reproduces it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingRecord {
    pub replica: u64,
    pub replica_seed: u64,
    pub tau: Option<f64>,
    pub events: u64,
}

/// Seed of replica `r` of a coupling experiment from start `init`.
pub fn coupling_seed(seed: u64, init: &InitKind, r: u64) -> u64 {
    replica_seed(replica_seed(seed, init.tag(), Role::Initial), r, Role::Coupling)
}

/// Runs `replicas` couplings of `init` against fresh stationary starts up
/// to `t_max`. The stationary start and the dynamics share one stream.
pub fn coupling_replicas(
    n: usize,
    init: &InitKind,
    t_max: f64,
    replicas: u64,
    seed: u64,
) -> Result<Vec<CouplingRecord>, EstimatorError> {
    if n < 2 {
        return Err(EstimatorError::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    let y_a = init.gaps(n)?;
    let law = JumpLaw::ExpUnit;
    par_replicas(replicas, |r| {
        let s = coupling_seed(seed, init, r);
        let mut rng = stream_from_seed(s);
        let y_b = sample_stationary_gaps(n, 1.0, &mut rng)?;
        let out = run_coupling(&y_a, &y_b, &law, t_max, &mut rng, false)?;
        Ok(CouplingRecord { replica: r, replica_seed: s, tau: out.tau, events: out.events })
    })
    .into_iter()
    .collect()
}

/// Tail estimates `P(tau > t)` for every `t` in the grid; censored runs
/// count as exceeding every grid point up to their horizon.
pub fn tails_on_grid(records: &[CouplingRecord], t_grid: &[f64]) -> Vec<TailEstimate> {
    t_grid
        .iter()
        .map(|&t| {
            let hits = records.iter().filter(|r| r.tau.is_none_or(|tau| tau > t)).count();
            TailEstimate::from_counts(hits as u64, records.len() as u64)
        })
        .collect()
}

pub fn coupling_tail(n: usize, init: &InitKind, t: f64, replicas: u64, seed: u64) -> Result<TailEstimate, EstimatorError> {
    if replicas < 100 {
        return Err(EstimatorError::TooFewSamples { needed: 100, got: replicas as usize });
    }
    let recs = coupling_replicas(n, init, t, replicas, seed)?;
    Ok(tails_on_grid(&recs, &[t])[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingEstimate {
    pub n: usize,
    pub t_grid: Vec<f64>,
    /// Worst-case coupling tail per grid point (largest upper confidence
    /// limit over the tested starts). Empty when only the lower side ran.
    pub tails: Vec<TailEstimate>,
    /// Smallest grid time whose worst-case upper confidence limit is below 1/4.
    pub t_mix_upper: Option<f64>,
    /// Gap-sum mean and variance per grid point. Empty when only the upper
    /// side ran.
    pub phi: Vec<MeanVar>,
    pub lower_bounds: Vec<f64>,
    /// Largest grid time whose lower bound exceeds 1/4, when the grid
    /// brackets the crossing.
    pub t_mix_lower: Option<f64>,
}

impl MixingEstimate {
    /// False when both ends resolve and the lower exceeds the upper.
    pub fn consistent(&self) -> bool {
        match (self.t_mix_lower, self.t_mix_upper) {
            (Some(l), Some(u)) => l <= u,
            _ => true,
        }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<(), EstimatorError> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(EstimatorError::InvalidArgument("time grid must be nonempty and nonnegative".into()));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EstimatorError::InvalidArgument("time grid must be increasing".into()));
    }
    Ok(())
}

/// The starts over which the coupling tail is maximised.
pub fn worst_case_starts() -> [InitKind; 2] {
    [InitKind::Zeros, InitKind::Spread { scale: 10.0 }]
}

/// Coupling-tail upper estimate over the starts `zeros` and `spread(10)`.
/// Each coupling runs once to the last grid time.
pub fn tmix_upper_estimate(n: usize, t_grid: &[f64], replicas: u64, seed: u64) -> Result<MixingEstimate, EstimatorError> {
    Ok(tmix_upper_with_records(n, t_grid, replicas, seed)?.0)
}

/// As [`tmix_upper_estimate`], also returning the coupling records of each
/// start.
pub fn tmix_upper_with_records(
    n: usize,
    t_grid: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<(MixingEstimate, Vec<(InitKind, Vec<CouplingRecord>)>), EstimatorError> {
    check_grid(t_grid)?;
    let t_max = *t_grid.last().unwrap();
    let mut worst: Option<Vec<TailEstimate>> = None;
    let mut all = Vec::new();
    for init in worst_case_starts() {
        let recs = coupling_replicas(n, &init, t_max, replicas, seed)?;
        let tails = tails_on_grid(&recs, t_grid);
        worst = Some(match worst {
            None => tails,
            Some(w) => w.into_iter().zip(tails).map(|(a, b)| if b.ci_high > a.ci_high { b } else { a }).collect(),
        });
        all.push((init, recs));
    }
    let tails = worst.unwrap();
    let t_mix_upper = t_grid.iter().zip(&tails).find(|(_, e)| e.ci_high < QUARTER).map(|(t, _)| *t);
    let est = MixingEstimate {
        n,
        t_grid: t_grid.to_vec(),
        tails,
        t_mix_upper,
        phi: Vec::new(),
        lower_bounds: Vec::new(),
        t_mix_lower: None,
    };
    Ok((est, all))
}

/// Distinguishing-statistic lower estimate from the point mass at
/// `(1 - delta) * 1`.
pub fn tmix_lower_estimate(
    n: usize,
    delta: f64,
    t_grid: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<MixingEstimate, EstimatorError> {
    check_grid(t_grid)?;
    if !(0.0..1.0).contains(&delta) {
        return Err(EstimatorError::InvalidArgument(format!("delta must lie in [0, 1), got {delta}")));
    }
    if n < 2 || replicas < 2 {
        return Err(EstimatorError::InvalidArgument("need n >= 2 and at least two replicas".into()));
    }
    let start = vec![1.0 - delta; n - 1];
    let rows: Vec<Vec<f64>> = par_replicas(replicas, |r| {
        let mut rng = stream_from_seed(replica_seed(seed, r, Role::Dynamics));
        let mut sim = Simulator::new(SystemState::new(start.clone())?, JumpLaw::ExpUnit)?;
        let mut phi = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            sim.run_until(t, &mut rng, &mut NullObserver)?;
            phi.push(sim.gaps().iter().sum::<f64>());
        }
        Ok::<_, EstimatorError>(phi)
    })
    .into_iter()
    .collect::<Result<_, _>>()?;

    let stat = (n - 1) as f64;
    let mut phi = Vec::with_capacity(t_grid.len());
    let mut lower_bounds = Vec::with_capacity(t_grid.len());
    for k in 0..t_grid.len() {
        let col: Vec<f64> = rows.iter().map(|row| row[k]).collect();
        let mv = mean_var(&col);
        lower_bounds.push(tv_lower_bound(mv.mean, stat, mv.var, stat));
        phi.push(mv);
    }
    let above = lower_bounds.iter().rposition(|b| *b > QUARTER);
    let t_mix_lower = match above {
        Some(k) if k + 1 < t_grid.len() => Some(t_grid[k]),
        _ => None,
    };
    Ok(MixingEstimate {
        n,
        t_grid: t_grid.to_vec(),
        tails: Vec::new(),
        t_mix_upper: None,
        phi,
        lower_bounds,
        t_mix_lower,
    })
}
