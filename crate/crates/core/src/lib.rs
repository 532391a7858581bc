//! Exact event-driven simulation of the stochastic follow-the-leader
//! particle system, its coalescent coupling, and the statistics used to
//! check its long-run behaviour.
//!
//! The gap vector is the primary state. Positions are recovered from the
//! leader position on demand.

pub mod coupling;
pub mod estimators;
pub mod kernel;
pub mod model;
pub mod rng;

pub use model::{JumpLaw, ModelError, Observable, SystemState};
