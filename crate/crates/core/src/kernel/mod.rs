//! Exact event-driven simulation.

mod frozen;
mod sampler;
mod sim;
pub mod trajectory;

pub use frozen::{run_frozen_beta, FrozenOutcome, FrozenState, FROZEN_THRESHOLD};
pub use sampler::{WeightedSampler, REBUILD_EVERY};
pub use sim::{
    hitting_time_tau_c, Actor, Event, HittingOutcome, NullObserver, Observer, Simulator,
    DEFAULT_EVENT_CAP, LYAPUNOV_ALPHA, LYAPUNOV_LEVEL,
};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("weight {weight} at index {index} is negative or not finite")]
    InvalidWeight { index: usize, weight: f64 },
    #[error("index {index} out of range for {len} weights")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("all weights are zero")]
    EmptyDistribution,
    #[error("end time {t_end} precedes the current clock {clock}")]
    TimeReversal { t_end: f64, clock: f64 },
    #[error("event cap of {cap} reached at time {clock} before the horizon")]
    HorizonExceeded { cap: u64, clock: f64 },
    #[error("frozen-boundaries process needs m >= 3, got {0}")]
    FrozenSize(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}
