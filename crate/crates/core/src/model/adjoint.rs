//! The adjoint of the gap-process generator acting on densities.
//!
//! For a density `f` on the open orthant,
//!
//! ```text
//! L* f(y) = int_0^inf f(y + u e_{n-1}) du
//!         + sum_{i=2}^{n-1} int_0^{y_i} f(y - u (e_i - e_{i-1})) du
//!         + int_0^{y_1} f(y - u e_1) e^{-u} du
//!         - f(y) (sum y + 1)
//! ```
//!
//! with unit-rate exponential leader jumps.

use std::fmt;
use std::sync::Arc;

use super::quadrature::{integrate, integrate_to_infinity};
use super::ModelError;

pub type DensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum DensityKind {
    /// `exp(-sum y)`.
    ProductExpUnit,
    /// `lambda^{n-1} exp(-lambda sum y)`.
    ProductExpRate(f64),
    /// Arbitrary density; quadrature only.
    Custom(DensityFn),
}

impl fmt::Debug for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityKind::ProductExpUnit => write!(f, "ProductExpUnit"),
            DensityKind::ProductExpRate(l) => write!(f, "ProductExpRate({l})"),
            DensityKind::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl DensityKind {
    fn rate(&self) -> Option<f64> {
        match self {
            DensityKind::ProductExpUnit => Some(1.0),
            DensityKind::ProductExpRate(l) => Some(*l),
            DensityKind::Custom(_) => None,
        }
    }

    /// Density value at `y`.
    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            DensityKind::Custom(f) => f(y),
            _ => {
                let l = self.rate().unwrap();
                if y.iter().any(|v| *v < 0.0) {
                    return 0.0;
                }
                l.powi(y.len() as i32) * (-l * y.iter().sum::<f64>()).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdjointMode {
    ClosedForm,
    /// Adaptive quadrature with absolute tolerance for the whole expression.
    Quadrature(f64),
}

pub fn adjoint_apply(y: &[f64], density: &DensityKind, mode: AdjointMode) -> Result<f64, ModelError> {
    if y.is_empty() || y.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(ModelError::InvalidArgument(
            "adjoint needs a nonempty, strictly positive point".into(),
        ));
    }
    if let Some(l) = density.rate() {
        if !(l.is_finite() && l > 0.0) {
            return Err(ModelError::InvalidArgument(format!("rate must be positive, got {l}")));
        }
    }
    match mode {
        AdjointMode::ClosedForm => {
            let l = density.rate().ok_or_else(|| {
                ModelError::Unsupported("closed form exists only for product exponential densities".into())
            })?;
            let y1 = y[0];
            // The inner transport terms sum to f(y)(sum y - y_1); the leader
            // term is f(y) g(y_1). Collecting everything leaves this bracket.
            let g = if l == 1.0 { y1 } else { ((l - 1.0) * y1).exp_m1() / (l - 1.0) };
            Ok(density.eval(y) * ((1.0 / l - 1.0) + (g - y1)))
        }
        AdjointMode::Quadrature(tol) => {
            if !(tol > 0.0) {
                return Err(ModelError::InvalidArgument(format!("tolerance must be positive, got {tol}")));
            }
            quadrature(y, density, tol)
        }
    }
}

fn quadrature(y: &[f64], density: &DensityKind, tol: f64) -> Result<f64, ModelError> {
    let m = y.len();
    let part = tol / (m + 1) as f64;
    let at = |edits: &[(usize, f64)]| {
        let mut p = y.to_vec();
        for &(i, d) in edits {
            p[i] += d;
        }
        density.eval(&p)
    };

    let mut total = integrate_to_infinity(|u| at(&[(m - 1, u)]), 0.0, part)?.value;
    for i in 1..m {
        total += integrate(|u| at(&[(i, -u), (i - 1, u)]), 0.0, y[i], part)?.value;
    }
    total += integrate(|u| at(&[(0, -u)]) * (-u).exp(), 0.0, y[0], part)?.value;
    Ok(total - density.eval(y) * (y.iter().sum::<f64>() + 1.0))
}
