//! Synchronized-leader coalescent coupling of two gap processes.
//!
//! Both systems share leader jump times and sizes. For pair `i` with gaps
//! `a_i, b_i`, write `m = min`, `d = |a_i - b_i|`. The pair fires at rate
//! `m + d`. A single uniform `v` on `(0, m + d)` decides the move: for
//! `v < d` only the faster follower jumps, by `v`; otherwise both jump, the
//! faster by `v` and the slower by `v - d`, which leaves the two gaps equal.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::kernel::{KernelError, WeightedSampler};
use crate::model::JumpLaw;
use crate::rng::{exp_holding, open01, unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoupledKind {
    Leader,
    /// Only the follower of the larger gap `pair` (1-based) moved.
    FasterOnly { pair: usize, faster: Side },
    /// Both followers of `pair` moved and the pair is now equal.
    Coalescence { pair: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledEvent {
    pub time: f64,
    pub kind: CoupledKind,
    /// Leader jump size, faster follower's jump size otherwise.
    pub size: f64,
}

#[derive(Debug, Clone)]
pub struct CoupledState {
    pub leader_pos: f64,
    gaps_a: Vec<f64>,
    gaps_b: Vec<f64>,
    /// `flags[i]`: pair `i` (0-based) has been made equal by a coalescence
    /// jump and not disturbed since.
    flags: Vec<bool>,
    prefix: usize,
    pub clock: f64,
    sampler: WeightedSampler,
    law: JumpLaw,
    events: u64,
    faster_only: u64,
    sign_violations: u64,
}

impl CoupledState {
    /// The coalesced prefix starts at the length of the leading run of
    /// bit-equal pairs.
    pub fn new(gaps_a: Vec<f64>, gaps_b: Vec<f64>, law: JumpLaw) -> Result<Self, KernelError> {
        if gaps_a.len() != gaps_b.len() || gaps_a.is_empty() {
            return Err(crate::model::ModelError::InvalidState(
                "coupled systems need equal, nonzero gap counts".into(),
            )
            .into());
        }
        for g in gaps_a.iter().chain(&gaps_b) {
            if !(g.is_finite() && *g >= 0.0) {
                return Err(crate::model::ModelError::InvalidState(format!("bad gap {g}")).into());
            }
        }
        law.validate()?;
        let prefix = gaps_a.iter().zip(&gaps_b).take_while(|(a, b)| a.to_bits() == b.to_bits()).count();
        let flags = (0..gaps_a.len()).map(|i| i < prefix).collect();
        let mut w = Vec::with_capacity(gaps_a.len() + 1);
        w.push(1.0);
        w.extend(gaps_a.iter().zip(&gaps_b).map(|(a, b)| a.max(*b)));
        Ok(Self {
            leader_pos: 0.0,
            gaps_a,
            gaps_b,
            flags,
            prefix,
            clock: 0.0,
            sampler: WeightedSampler::new(&w)?,
            law,
            events: 0,
            faster_only: 0,
            sign_violations: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.gaps_a.len() + 1
    }

    pub fn gaps_a(&self) -> &[f64] {
        &self.gaps_a
    }

    pub fn gaps_b(&self) -> &[f64] {
        &self.gaps_b
    }

    /// Number of leading pairs coalesced in order.
    pub fn coalesced_prefix(&self) -> usize {
        self.prefix
    }

    pub fn is_coalesced(&self) -> bool {
        self.prefix == self.gaps_a.len()
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn faster_only_events(&self) -> u64 {
        self.faster_only
    }

    /// Faster-only jumps after which the faster gap was no longer strictly
    /// larger. Zero by construction; counted as a runtime check.
    pub fn sign_violations(&self) -> u64 {
        self.sign_violations
    }

    pub fn rate(&self) -> f64 {
        self.sampler.total()
    }

    /// `sum_i |a_i - b_i|`.
    pub fn l1_distance(&self) -> f64 {
        self.gaps_a.iter().zip(&self.gaps_b).map(|(a, b)| (a - b).abs()).sum()
    }

    fn refresh(&mut self, i: usize) {
        let w = self.gaps_a[i].max(self.gaps_b[i]);
        self.sampler.update(i + 1, w).expect("gaps stay finite and nonnegative");
    }

    /// Advances the clock to the next event and applies it.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> CoupledEvent {
        self.clock += exp_holding(rng, self.sampler.total());
        self.jump(rng)
    }

    fn jump<R: Rng + ?Sized>(&mut self, rng: &mut R) -> CoupledEvent {
        let slot = self.sampler.pick(unit(rng) * self.sampler.total()).expect("leader keeps rate positive");
        self.events += 1;
        let last = self.gaps_a.len() - 1;
        if slot == 0 {
            let z = self.law.sample(open01(rng));
            self.leader_pos += z;
            self.gaps_a[0] += z;
            self.gaps_b[0] += z;
            self.refresh(0);
            return CoupledEvent { time: self.clock, kind: CoupledKind::Leader, size: z };
        }
        let i = slot - 1;
        let (a, b) = (self.gaps_a[i], self.gaps_b[i]);
        let faster = if a >= b { Side::A } else { Side::B };
        let (gf, gs) = if a >= b { (a, b) } else { (b, a) };
        let d = gf - gs;
        let v = open01(rng) * gf;

        let (new_f, new_s, push_f, push_s, kind);
        if v < d {
            let mut x = gf - v;
            if x <= gs {
                // Rounding can erase a sub-ulp margin; keep the faster strictly ahead.
                x = gs.next_up();
            }
            (new_f, new_s, push_f, push_s) = (x, gs, v, 0.0);
            if !(new_f > new_s) {
                self.sign_violations += 1;
            }
            self.faster_only += 1;
            kind = CoupledKind::FasterOnly { pair: i + 1, faster };
        } else {
            let common = (gf - v).max(0.0);
            (new_f, new_s, push_f, push_s) = (common, common, v, v - d);
            kind = CoupledKind::Coalescence { pair: i + 1 };
        }

        let (fa, fb) = match faster {
            Side::A => ((new_f, push_f), (new_s, push_s)),
            Side::B => ((new_s, push_s), (new_f, push_f)),
        };
        self.gaps_a[i] = fa.0;
        self.gaps_b[i] = fb.0;
        self.refresh(i);
        if i < last {
            self.gaps_a[i + 1] += fa.1;
            self.gaps_b[i + 1] += fb.1;
            self.refresh(i + 1);
            if d > 0.0 {
                self.flags[i + 1] = false;
            }
        }
        if let CoupledKind::Coalescence { .. } = kind {
            self.flags[i] = true;
            if i == self.prefix {
                self.prefix += 1;
            }
        }
        CoupledEvent { time: self.clock, kind, size: v }
    }

    /// Runs until the next event would fall after `t_end`; the clock is then
    /// set to `t_end`.
    pub fn run_until<R: Rng + ?Sized>(&mut self, t_end: f64, rng: &mut R) {
        loop {
            let dt = exp_holding(rng, self.sampler.total());
            if self.clock + dt > t_end {
                break;
            }
            self.clock += dt;
            self.jump(rng);
        }
        self.clock = self.clock.max(t_end);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingOutcome {
    /// Prefix-completion time, `None` if censored.
    pub tau: Option<f64>,
    pub events: u64,
    pub prefix_history: Option<Vec<(f64, usize)>>,
}

impl CouplingOutcome {
    pub fn censored(&self) -> bool {
        self.tau.is_none()
    }
}

/// Runs the coupling until every pair has coalesced in order, or until
/// `t_max` (censored).
pub fn run_coupling<R: Rng + ?Sized>(
    y_a: &[f64],
    y_b: &[f64],
    law: &JumpLaw,
    t_max: f64,
    rng: &mut R,
    record_prefix: bool,
) -> Result<CouplingOutcome, KernelError> {
    let mut cs = CoupledState::new(y_a.to_vec(), y_b.to_vec(), law.clone())?;
    let mut history = record_prefix.then(|| vec![(0.0, cs.prefix)]);
    while !cs.is_coalesced() {
        let dt = exp_holding(rng, cs.rate());
        if cs.clock + dt > t_max {
            return Ok(CouplingOutcome { tau: None, events: cs.events, prefix_history: history });
        }
        cs.clock += dt;
        let before = cs.prefix;
        cs.jump(rng);
        if cs.prefix != before {
            if let Some(h) = history.as_mut() {
                h.push((cs.clock, cs.prefix));
            }
        }
    }
    Ok(CouplingOutcome { tau: Some(cs.clock), events: cs.events, prefix_history: history })
}

/// `n - 1` independent exponential draws with rate `lambda`.
pub fn sample_stationary_gaps<R: Rng + ?Sized>(n: usize, lambda: f64, rng: &mut R) -> Result<Vec<f64>, KernelError> {
    if n < 2 {
        return Err(crate::model::ModelError::InvalidState(format!("n must be at least 2, got {n}")).into());
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(crate::model::ModelError::InvalidArgument(format!("rate must be positive, got {lambda}")).into());
    }
    Ok((0..n - 1).map(|_| exp_holding(rng, lambda)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_from_seed;

    #[test]
    fn identical_systems_stay_identical() {
        let g = vec![1.0, 0.3, 2.0, 0.0];
        let mut cs = CoupledState::new(g.clone(), g, JumpLaw::ExpUnit).unwrap();
        assert!(cs.is_coalesced());
        let mut rng = stream_from_seed(1);
        for _ in 0..10_000 {
            let ev = cs.step(&mut rng);
            assert!(!matches!(ev.kind, CoupledKind::FasterOnly { .. }));
            assert_eq!(cs.gaps_a(), cs.gaps_b());
        }
        let out = run_coupling(&[1.0, 2.0], &[1.0, 2.0], &JumpLaw::ExpUnit, 10.0, &mut rng, false).unwrap();
        assert_eq!(out.tau, Some(0.0));
    }

    #[test]
    fn prefix_invariants() {
        let mut rng = stream_from_seed(2);
        let mut cs = CoupledState::new(vec![0.0; 5], vec![3.0, 1.0, 0.5, 2.0, 1.0], JumpLaw::ExpUnit).unwrap();
        let mut prev = cs.coalesced_prefix();
        let mut done_at = None;
        for k in 0..200_000 {
            let before: Vec<f64> = cs.gaps_a().iter().zip(cs.gaps_b()).map(|(a, b)| a - b).collect();
            let ev = cs.step(&mut rng);
            if let CoupledKind::FasterOnly { pair, .. } = ev.kind {
                let after = cs.gaps_a()[pair - 1] - cs.gaps_b()[pair - 1];
                assert_eq!(after.signum(), before[pair - 1].signum());
                assert!(after != 0.0);
            }
            let p = cs.coalesced_prefix();
            assert!(p >= prev);
            prev = p;
            for i in 0..p {
                assert_eq!(cs.gaps_a()[i].to_bits(), cs.gaps_b()[i].to_bits());
            }
            if cs.is_coalesced() && done_at.is_none() {
                done_at = Some(k);
            }
            if done_at.is_some() {
                assert_eq!(cs.gaps_a(), cs.gaps_b());
            }
        }
        assert!(done_at.is_some());
        assert_eq!(cs.sign_violations(), 0);
    }

    #[test]
    fn pair_weights_by_hand() {
        let cs = CoupledState::new(vec![1.0, 0.0], vec![3.0, 0.0], JumpLaw::ExpUnit).unwrap();
        assert_eq!(cs.rate(), 4.0);
        assert_eq!(cs.sampler.weight(1), 3.0);
        assert_eq!(cs.coalesced_prefix(), 0);
        let partial = CoupledState::new(vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 4.0], JumpLaw::ExpUnit).unwrap();
        assert_eq!(partial.coalesced_prefix(), 2);
    }

    #[test]
    fn stationary_draws() {
        let mut rng = stream_from_seed(3);
        assert_eq!(sample_stationary_gaps(2, 1.0, &mut rng).unwrap().len(), 1);
        assert!(sample_stationary_gaps(1, 1.0, &mut rng).is_err());
        assert!(sample_stationary_gaps(3, 0.0, &mut rng).is_err());
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        assert!(CoupledState::new(vec![1.0], vec![1.0, 2.0], JumpLaw::ExpUnit).is_err());
    }
}
