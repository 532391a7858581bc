//! Jump-size laws for the leading particle.
//!
//! Every law is normalized to mean one. Sampling is by inverse CDF so a law
//! plus a uniform variate fully determines the jump size.

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Distribution of the leader's jump sizes.
///
/// Deserialization validates parameters and normalizes tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "LawRepr")]
pub enum JumpLaw {
    /// Exponential with rate one.
    ExpUnit,
    /// Pareto with tail index `tail_index` and scale `(tail_index - 1) / tail_index`.
    ParetoUnitMean { tail_index: f64 },
    /// Point mass. Only `value == 1` satisfies the unit-mean normalization.
    Constant { value: f64 },
    /// Discrete law on positive `values`; values are rescaled to mean one at
    /// construction.
    Table { values: Vec<f64>, weights: Vec<f64> },
}

// Struct variants throughout so that unknown keys are rejected for every kind.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum LawRepr {
    ExpUnit {},
    ParetoUnitMean { tail_index: f64 },
    Constant { value: f64 },
    Table { values: Vec<f64>, weights: Vec<f64> },
}

impl TryFrom<LawRepr> for JumpLaw {
    type Error = ModelError;

    fn try_from(r: LawRepr) -> Result<Self, ModelError> {
        match r {
            LawRepr::ExpUnit {} => Ok(JumpLaw::ExpUnit),
            LawRepr::ParetoUnitMean { tail_index } => JumpLaw::pareto_unit_mean(tail_index),
            LawRepr::Constant { value } => JumpLaw::constant(value),
            LawRepr::Table { values, weights } => JumpLaw::table(values, weights),
        }
    }
}

impl JumpLaw {
    pub fn pareto_unit_mean(tail_index: f64) -> Result<Self, ModelError> {
        let law = JumpLaw::ParetoUnitMean { tail_index };
        law.validate()?;
        Ok(law)
    }

    pub fn constant(value: f64) -> Result<Self, ModelError> {
        let law = JumpLaw::Constant { value };
        law.validate()?;
        Ok(law)
    }

    /// Builds a tabulated law, rescaling `values` so the weighted mean is one.
    pub fn table(values: Vec<f64>, weights: Vec<f64>) -> Result<Self, ModelError> {
        check_table(&values, &weights)?;
        let total: f64 = weights.iter().sum();
        let mean: f64 = values.iter().zip(&weights).map(|(v, w)| v * w).sum::<f64>() / total;
        let values = values.into_iter().map(|v| v / mean).collect();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(JumpLaw::Table { values, weights })
    }

    /// Checks parameters; deserialized laws must pass through here.
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            JumpLaw::ExpUnit => Ok(()),
            JumpLaw::ParetoUnitMean { tail_index } => {
                if !tail_index.is_finite() || *tail_index <= 1.0 {
                    Err(ModelError::InvalidLaw(format!(
                        "Pareto tail index must exceed 1 for a finite mean, got {tail_index}"
                    )))
                } else {
                    Ok(())
                }
            }
            JumpLaw::Constant { value } => {
                if (*value - 1.0).abs() > 1e-12 {
                    Err(ModelError::InvalidLaw(format!(
                        "constant jump law must have mean 1, got {value}"
                    )))
                } else {
                    Ok(())
                }
            }
            JumpLaw::Table { values, weights } => {
                check_table(values, weights)?;
                let total: f64 = weights.iter().sum();
                let mean: f64 =
                    values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
                if (mean - 1.0).abs() > 1e-9 {
                    return Err(ModelError::InvalidLaw(format!(
                        "tabulated jump law must have mean 1, got {mean}; use JumpLaw::table to normalize"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Returns the table in normalized form; other laws are returned unchanged.
    pub fn normalized(self) -> Result<Self, ModelError> {
        match self {
            JumpLaw::Table { values, weights } => JumpLaw::table(values, weights),
            other => {
                other.validate()?;
                Ok(other)
            }
        }
    }

    /// Inverse-CDF transform of `uniform`, which must lie in the open unit
    /// interval. The result is strictly positive.
    pub fn sample(&self, uniform: f64) -> f64 {
        debug_assert!(uniform > 0.0 && uniform < 1.0, "uniform {uniform} outside (0,1)");
        match self {
            JumpLaw::ExpUnit => -(-uniform).ln_1p(),
            JumpLaw::ParetoUnitMean { tail_index } => {
                let scale = (tail_index - 1.0) / tail_index;
                scale * (1.0 - uniform).powf(-1.0 / tail_index)
            }
            JumpLaw::Constant { value } => *value,
            JumpLaw::Table { values, weights } => {
                let mut acc = 0.0;
                for (v, w) in values.iter().zip(weights) {
                    acc += w;
                    if uniform < acc {
                        return *v;
                    }
                }
                // Rounding left the cumulative weight a hair below one.
                *values.iter().zip(weights).rev().find(|(_, w)| **w > 0.0).map(|(v, _)| v).unwrap()
            }
        }
    }

    /// Mean of the law (one for every valid law).
    pub fn mean(&self) -> f64 {
        self.moment(1).unwrap_or(f64::INFINITY)
    }

    /// `j`-th raw moment when it is finite and known in closed form.
    pub fn moment(&self, j: u32) -> Option<f64> {
        match self {
            JumpLaw::ExpUnit => Some((1..=j).map(f64::from).product()),
            JumpLaw::ParetoUnitMean { tail_index } => {
                let jf = f64::from(j);
                if jf >= *tail_index {
                    None
                } else {
                    let scale = (tail_index - 1.0) / tail_index;
                    Some(tail_index * scale.powi(j as i32) / (tail_index - jf))
                }
            }
            JumpLaw::Constant { value } => Some(value.powi(j as i32)),
            JumpLaw::Table { values, weights } => {
                let total: f64 = weights.iter().sum();
                Some(values.iter().zip(weights).map(|(v, w)| w * v.powi(j as i32)).sum::<f64>() / total)
            }
        }
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            JumpLaw::ExpUnit => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x).exp_m1()
                }
            }
            JumpLaw::ParetoUnitMean { tail_index } => {
                let scale = (tail_index - 1.0) / tail_index;
                if x < scale {
                    0.0
                } else {
                    1.0 - (scale / x).powf(*tail_index)
                }
            }
            JumpLaw::Constant { value } => {
                if x < *value {
                    0.0
                } else {
                    1.0
                }
            }
            JumpLaw::Table { values, weights } => {
                let total: f64 = weights.iter().sum();
                values.iter().zip(weights).filter(|(v, _)| **v <= x).map(|(_, w)| w).sum::<f64>() / total
            }
        }
    }
}

fn check_table(values: &[f64], weights: &[f64]) -> Result<(), ModelError> {
    if values.is_empty() || values.len() != weights.len() {
        return Err(ModelError::InvalidLaw(
            "table needs equally many values and weights, at least one".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(ModelError::InvalidLaw("table values must be finite and positive".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
        return Err(ModelError::InvalidLaw(
            "table weights must be nonnegative with positive total".into(),
        ));
    }
    Ok(())
}
