//! Statistics that turn simulation output into checkable numbers.

mod fclt;
mod fit;
mod hill;
mod ks;
mod mixing;
mod moments;
mod tv;

pub use fclt::fclt_profile;
pub use fit::{fit_power_law, PowerFit};
pub use hill::{hill_estimator, k_from_fraction, HillEstimate, Z_ONE_SIDED_95};
pub use ks::{kolmogorov_q, ks_p_value, ks_statistic, ks_test, ks_two_sample, KsResult, KS_MIN_SAMPLES};
pub use mixing::{
    coupling_replicas, coupling_seed, coupling_tail, tails_on_grid, tmix_lower_estimate, tmix_upper_estimate, tmix_upper_with_records,
    worst_case_starts, CouplingRecord,
    InitKind, MixingEstimate,
};
pub use moments::{covariance, mean_var, moment_ci, MeanVar};
pub use tv::{tv_lower_bound, wilson_interval, TailEstimate, Z95};

use thiserror::Error;

use crate::kernel::KernelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("samples contain non-finite values")]
    NonFinite,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}
