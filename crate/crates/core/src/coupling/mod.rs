//! Couplings: the coalescent coupling of two gap processes and the thinning
//! coupling used for stochastic dominance.

mod coupled;
mod dominance;

pub use coupled::{
    run_coupling, sample_stationary_gaps, CoupledEvent, CoupledKind, CoupledState, CouplingOutcome, Side,
};
pub use dominance::{dominance_run, sample_start, DominanceOutcome, DominanceViolation, LeaderPath};
