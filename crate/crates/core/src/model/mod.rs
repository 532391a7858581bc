//! Domain types and closed-form operator evaluation.

mod adjoint;
mod generator;
mod law;
pub mod quadrature;
mod state;

pub use adjoint::{adjoint_apply, AdjointMode, DensityFn, DensityKind};
pub use generator::{generator_apply, observable_value, Observable};
pub use law::JumpLaw;
pub use state::{rescale_gaps, total_rate, SystemState};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid jump law: {0}")]
    InvalidLaw(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quadrature did not reach tolerance {tol:e} (error estimate {estimate:e})")]
    Tolerance { tol: f64, estimate: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
