//! Strict JSON experiment configuration.

use std::path::PathBuf;

use ftl_core::coupling::LeaderPath;
use ftl_core::JumpLaw;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Simulate,
    GeneratorCheck,
    AdjointCheck,
    StationaryTest,
    Couple,
    TmixUpper,
    TmixLower,
    FrozenBeta,
    DominanceCheck,
    HeavyTail,
    Fclt,
    HittingTime,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::GeneratorCheck => "generator-check",
            Command::AdjointCheck => "adjoint-check",
            Command::StationaryTest => "stationary-test",
            Command::Couple => "couple",
            Command::TmixUpper => "tmix-upper",
            Command::TmixLower => "tmix-lower",
            Command::FrozenBeta => "frozen-beta",
            Command::DominanceCheck => "dominance-check",
            Command::HeavyTail => "heavy-tail",
            Command::Fclt => "fclt",
            Command::HittingTime => "hitting-time",
        }
    }
}

/// Worker count: a positive integer or `"auto"` (all cores).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    #[default]
    Auto,
    Count(usize),
}

impl Workers {
    pub fn resolve(self) -> usize {
        match self {
            Workers::Auto => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            Workers::Count(k) => k,
        }
    }
}

impl std::str::FromStr for Workers {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Workers::Auto);
        }
        s.parse::<usize>().map(Workers::Count).map_err(|_| format!("expected a positive integer or \"auto\", got {s:?}"))
    }
}

impl Serialize for Workers {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Workers::Auto => s.serialize_str("auto"),
            Workers::Count(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Workers {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(k) => Ok(Workers::Count(k)),
            Raw::Word(w) if w == "auto" => Ok(Workers::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected a positive integer or \"auto\", got {w:?}"))),
        }
    }
}

/// Initial gap configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Start {
    Zeros,
    Spread { scale: f64 },
    Custom { gaps: Vec<f64> },
    /// Independent exponential gaps with rate `lambda`.
    Stationary { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogKind {
    None,
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub n: usize,
    pub law: JumpLaw,
    /// Initial gaps; each command has its own default when absent.
    pub start: Option<Start>,
    pub t_end: f64,
    pub t_grid: Option<Vec<f64>>,
    pub replicas: u64,
    pub seed: u64,
    pub workers: Workers,
    pub out_dir: PathBuf,
    /// Distance of the lower-bound start below the stationary mean.
    pub delta: f64,
    /// Lyapunov parameter used by the hitting set.
    pub alpha: f64,
    pub m_list: Vec<usize>,
    pub x_grid: Vec<f64>,
    /// Fraction of samples used as Hill order statistics.
    pub k_fraction: f64,
    /// Censoring horizon for hitting and frozen-boundary times.
    pub t_cap: f64,
    /// Finite-difference step for generator checks.
    pub h: f64,
    /// Random evaluation points for generator and adjoint checks.
    pub points: usize,
    /// Quadrature tolerance for adjoint checks.
    pub tol: f64,
    /// Rate of the product exponential density checked by `adjoint-check`.
    pub lambda: f64,
    /// Burn-in in units of `n` time for samples off the exponential case.
    pub burn_in_factor: f64,
    pub leader_paths: Vec<LeaderPath>,
    pub log: LogKind,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: None,
            n: 4,
            law: JumpLaw::ExpUnit,
            start: None,
            t_end: 1.0,
            t_grid: None,
            replicas: 1,
            seed: 0,
            workers: Workers::Auto,
            out_dir: PathBuf::from("out"),
            delta: 0.9,
            alpha: 0.1,
            m_list: vec![8, 16, 32, 64],
            x_grid: vec![0.25, 0.5, 0.75, 1.0],
            k_fraction: 0.01,
            t_cap: 1e6,
            h: 1e-3,
            points: 5,
            tol: 1e-8,
            lambda: 1.0,
            burn_in_factor: 10.0,
            leader_paths: vec![LeaderPath::Frozen, LeaderPath::ExpUnit],
            log: LogKind::None,
        }
    }
}

fn range(key: &str, ok: bool, msg: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::Range { key: key.into(), message: msg.into() })
    }
}

impl ExperimentConfig {
    /// Parses and validates a JSON document. Errors name the offending key.
    pub fn parse(text: &[u8]) -> Result<Self, ConfigError> {
        let text = std::str::from_utf8(text).map_err(|e| ConfigError::Syntax(format!("not UTF-8: {e}")))?;
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        if !value.is_object() {
            return Err(ConfigError::Field { path: ".".into(), message: "expected a JSON object".into() });
        }
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if inner.is_syntax() || inner.is_eof() {
                ConfigError::Syntax(inner.to_string())
            } else {
                ConfigError::Field { path, message: inner.to_string() }
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        range("n", self.n >= 2, "must be at least 2")?;
        range("replicas", self.replicas >= 1, "must be at least 1")?;
        range("t_end", self.t_end.is_finite() && self.t_end >= 0.0, "must be finite and nonnegative")?;
        if let Some(g) = &self.t_grid {
            range("t_grid", !g.is_empty(), "must not be empty")?;
            range("t_grid", g.iter().all(|t| t.is_finite() && *t >= 0.0), "entries must be finite and nonnegative")?;
            range("t_grid", g.windows(2).all(|w| w[0] < w[1]), "must be strictly increasing")?;
        }
        range("workers", self.workers != Workers::Count(0), "must be positive or \"auto\"")?;
        range("delta", (0.0..1.0).contains(&self.delta), "must lie in [0, 1)")?;
        range("alpha", self.alpha > 0.0 && self.alpha < 1.0, "must lie in (0, 1)")?;
        range("m_list", !self.m_list.is_empty() && self.m_list.iter().all(|m| *m >= 3), "entries must be at least 3")?;
        range("x_grid", self.x_grid.iter().all(|x| *x > 0.0 && *x <= 1.0), "entries must lie in (0, 1]")?;
        range("k_fraction", self.k_fraction > 0.0 && self.k_fraction < 1.0, "must lie in (0, 1)")?;
        range("t_cap", self.t_cap > 0.0, "must be positive")?;
        range("h", self.h > 0.0 && self.h.is_finite(), "must be positive")?;
        range("points", self.points >= 1, "must be at least 1")?;
        range("tol", self.tol > 0.0, "must be positive")?;
        range("lambda", self.lambda > 0.0 && self.lambda.is_finite(), "must be positive")?;
        range("burn_in_factor", self.burn_in_factor >= 0.0, "must be nonnegative")?;
        range("leader_paths", !self.leader_paths.is_empty(), "must not be empty")?;
        match self.start.as_ref().unwrap_or(&Start::Zeros) {
            Start::Spread { scale } => range("start.scale", *scale >= 0.0 && scale.is_finite(), "must be nonnegative")?,
            Start::Custom { gaps } => {
                range("start.gaps", gaps.len() == self.n - 1, "must have n - 1 entries")?;
                range("start.gaps", gaps.iter().all(|g| *g >= 0.0 && g.is_finite()), "must be nonnegative")?;
            }
            Start::Stationary { lambda } => range("start.lambda", *lambda > 0.0 && lambda.is_finite(), "must be positive")?,
            Start::Zeros => {}
        }
        self.law.validate().map_err(|e| ConfigError::Range { key: "law".into(), message: e.to_string() })
    }
}
