use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{KernelError, WeightedSampler};
use crate::model::{JumpLaw, SystemState};
use crate::rng::{exp_holding, open01, unit};

/// Default safety cap on events in a single `run_until` call.
pub const DEFAULT_EVENT_CAP: u64 = 1 << 40;

/// Parameter of the Lyapunov function used for the hitting set.
pub const LYAPUNOV_ALPHA: f64 = 0.1;
/// The hitting set is `{ V <= LYAPUNOV_LEVEL }`.
pub const LYAPUNOV_LEVEL: f64 = 4.0;

/// Which particle moved. `Follower(i)` is the particle behind gap `i`
/// (1-based), i.e. particle `i + 1`, whose jump shrinks gap `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Actor {
    Leader,
    Follower(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub actor: Actor,
    pub size: f64,
    /// The gap in front of the mover before the jump; gap 1 for the leader.
    pub gap_before: f64,
}

pub trait Observer {
    fn on_event(&mut self, _state: &SystemState, _event: &Event) {}
    fn on_end(&mut self, _state: &SystemState) {}
}

pub struct NullObserver;
impl Observer for NullObserver {}

impl<F: FnMut(&SystemState, &Event)> Observer for F {
    fn on_event(&mut self, state: &SystemState, event: &Event) {
        self(state, event)
    }
}

/// A single system together with its rate sampler.
///
/// Sampler slot 0 holds the leader rate 1 and slot `i` holds gap `i`, so the
/// sampler total equals the total jump rate.
#[derive(Debug, Clone)]
pub struct Simulator {
    state: SystemState,
    law: JumpLaw,
    sampler: WeightedSampler,
    events: u64,
    event_cap: u64,
}

impl Simulator {
    pub fn new(state: SystemState, law: JumpLaw) -> Result<Self, KernelError> {
        law.validate()?;
        let mut w = Vec::with_capacity(state.n());
        w.push(1.0);
        w.extend_from_slice(&state.gaps);
        let sampler = WeightedSampler::new(&w)?;
        Ok(Self { state, law, sampler, events: 0, event_cap: DEFAULT_EVENT_CAP })
    }

    pub fn with_event_cap(mut self, cap: u64) -> Self {
        self.event_cap = cap;
        self
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn into_state(self) -> SystemState {
        self.state
    }

    pub fn gaps(&self) -> &[f64] {
        &self.state.gaps
    }

    pub fn clock(&self) -> f64 {
        self.state.clock
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn sampler(&self) -> &WeightedSampler {
        &self.sampler
    }

    /// Current total jump rate as tracked by the sampler.
    pub fn rate(&self) -> f64 {
        self.sampler.total()
    }

    /// Advances to the next event and applies it.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Event {
        self.state.clock += exp_holding(rng, self.sampler.total());
        self.jump(rng)
    }

    /// Chooses an actor in proportion to its rate and applies its jump,
    /// leaving the clock untouched.
    fn jump<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Event {
        let target = unit(rng) * self.sampler.total();
        let idx = self.sampler.pick(target).expect("leader rate keeps the total positive");
        let gaps = &mut self.state.gaps;
        let ev = if idx == 0 {
            let z = self.law.sample(open01(rng));
            let before = gaps[0];
            gaps[0] += z;
            self.state.leader_pos += z;
            self.sampler.update(1, gaps[0]).expect("gap stays finite");
            Event { time: self.state.clock, actor: Actor::Leader, size: z, gap_before: before }
        } else {
            let before = gaps[idx - 1];
            let u = open01(rng) * before;
            gaps[idx - 1] = before - u;
            self.sampler.update(idx, gaps[idx - 1]).expect("gap stays nonnegative");
            if idx < gaps.len() {
                gaps[idx] += u;
                self.sampler.update(idx + 1, gaps[idx]).expect("gap stays finite");
            }
            Event { time: self.state.clock, actor: Actor::Follower(idx), size: u, gap_before: before }
        };
        self.events += 1;
        ev
    }

    /// Runs until the next event would fall after `t_end`, then sets the
    /// clock to `t_end`. Exact because holding times are memoryless.
    pub fn run_until<R, O>(&mut self, t_end: f64, rng: &mut R, observer: &mut O) -> Result<(), KernelError>
    where
        R: Rng + ?Sized,
        O: Observer + ?Sized,
    {
        if t_end < self.state.clock {
            return Err(KernelError::TimeReversal { t_end, clock: self.state.clock });
        }
        let mut count = 0u64;
        loop {
            let dt = exp_holding(rng, self.sampler.total());
            if self.state.clock + dt > t_end {
                break;
            }
            if count >= self.event_cap {
                return Err(KernelError::HorizonExceeded { cap: self.event_cap, clock: self.state.clock });
            }
            self.state.clock += dt;
            let ev = self.jump(rng);
            observer.on_event(&self.state, &ev);
            count += 1;
        }
        self.state.clock = t_end;
        observer.on_end(&self.state);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingOutcome {
    pub tau: f64,
    pub censored: bool,
    pub events: u64,
}

fn lyapunov(gaps: &[f64]) -> f64 {
    let mut v = 1.0;
    let mut w = 1.0;
    for y in gaps {
        w *= LYAPUNOV_ALPHA;
        v += w * y;
    }
    v
}

/// First time the Lyapunov function (parameter 0.1) drops to 4 or below.
/// Returns zero when the start is already inside; censored at `t_cap`.
pub fn hitting_time_tau_c<R: Rng + ?Sized>(
    state0: SystemState,
    law: &JumpLaw,
    rng: &mut R,
    t_cap: f64,
) -> Result<HittingOutcome, KernelError> {
    let start = state0.clock;
    let mut sim = Simulator::new(state0, law.clone())?;
    if lyapunov(sim.gaps()) <= LYAPUNOV_LEVEL {
        return Ok(HittingOutcome { tau: 0.0, censored: false, events: 0 });
    }
    loop {
        let dt = exp_holding(rng, sim.rate());
        if sim.clock() + dt - start > t_cap {
            return Ok(HittingOutcome { tau: t_cap, censored: true, events: sim.events() });
        }
        sim.state.clock += dt;
        sim.jump(rng);
        if lyapunov(sim.gaps()) <= LYAPUNOV_LEVEL {
            return Ok(HittingOutcome { tau: sim.clock() - start, censored: false, events: sim.events() });
        }
    }
}
