//! Typed Monte Carlo drivers shared by the commands and the acceptance suite.
//!
//! Every replica owns one stream seeded by its recorded `replica_seed`; any
//! auxiliary stream a replica needs is derived from that seed, so a single
//! row can be re-simulated in isolation. Results are assembled in replica
//! order and reduced sequentially, so they do not depend on the worker count.

use ftl_core::coupling::{dominance_run, run_coupling, sample_start, sample_stationary_gaps, CoupledState, LeaderPath};
use ftl_core::estimators::{
    covariance, fclt_profile, fit_power_law, hill_estimator, k_from_fraction, ks_test, ks_two_sample, mean_var,
    HillEstimate, KsResult, MeanVar, PowerFit, TailEstimate,
};
use ftl_core::kernel::trajectory::{LogFormat, TrajectoryLog};
use ftl_core::kernel::{hitting_time_tau_c, run_frozen_beta, NullObserver, Simulator};
use ftl_core::model::{adjoint_apply, generator_apply, observable_value, AdjointMode, DensityKind};
use ftl_core::rng::{open01, par_replicas, replica_seed, stream_from_seed, Role, Stream};
use ftl_core::{JumpLaw, Observable, SystemState};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::config::Start;
use crate::RunError;

/// Seed of replica `r` for `role` under experiment seed `seed`.
pub fn row_seed(seed: u64, r: u64, role: Role) -> u64 {
    replica_seed(seed, r, role)
}

/// Stream derived from a row seed for a secondary purpose.
fn side_stream(row: u64, role: Role) -> Stream {
    stream_from_seed(replica_seed(row, 0, role))
}

/// Draws an initial gap vector.
pub fn draw_start(start: &Start, n: usize, rng: &mut Stream) -> Result<Vec<f64>, RunError> {
    Ok(match start {
        Start::Zeros => vec![0.0; n - 1],
        Start::Spread { scale } => vec![*scale; n - 1],
        Start::Custom { gaps } => gaps.clone(),
        Start::Stationary { lambda } => sample_stationary_gaps(n, *lambda, rng)?,
    })
}

/// Strictly positive unit exponential.
fn positive_exp(rng: &mut Stream) -> f64 {
    -open01(rng).ln()
}

fn unit_exp_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x).exp_m1()
    }
}

fn column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub replica: u64,
    pub replica_seed: u64,
    pub time: f64,
    pub events: u64,
    pub leader_pos: f64,
    pub gaps: Vec<f64>,
}

/// Runs each replica through `t_grid` and snapshots at every grid time.
pub fn simulate(
    n: usize,
    law: &JumpLaw,
    start: &Start,
    t_grid: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<Vec<Snapshot>, RunError> {
    Ok(simulate_logged(n, law, start, t_grid, replicas, seed, None)?.0)
}

/// As [`simulate`], optionally also returning each replica's event log.
pub fn simulate_logged(
    n: usize,
    law: &JumpLaw,
    start: &Start,
    t_grid: &[f64],
    replicas: u64,
    seed: u64,
    log: Option<LogFormat>,
) -> Result<(Vec<Snapshot>, Vec<Vec<u8>>), RunError> {
    let per: Vec<Result<(Vec<Snapshot>, Vec<u8>), RunError>> = par_replicas(replicas, |r| {
        let s = row_seed(seed, r, Role::Dynamics);
        let mut rng = stream_from_seed(s);
        let gaps = draw_start(start, n, &mut rng)?;
        let mut sim = Simulator::new(SystemState::new(gaps)?, law.clone())?;
        let mut out = Vec::with_capacity(t_grid.len());
        let mut logger = log.map(|f| TrajectoryLog::new(Vec::new(), f));
        for &t in t_grid {
            match logger.as_mut() {
                Some(l) => sim.run_until(t, &mut rng, l)?,
                None => sim.run_until(t, &mut rng, &mut NullObserver)?,
            }
            out.push(Snapshot {
                replica: r,
                replica_seed: s,
                time: t,
                events: sim.events(),
                leader_pos: sim.state().leader_pos,
                gaps: sim.gaps().to_vec(),
            });
        }
        let bytes = match logger {
            Some(l) => l.finish().map_err(|e| RunError::Io(e.to_string()))?,
            None => Vec::new(),
        };
        Ok((out, bytes))
    });
    let mut rows = Vec::new();
    let mut logs = Vec::new();
    for p in per {
        let (snap, bytes) = p?;
        rows.extend(snap);
        if log.is_some() {
            logs.push(bytes);
        }
    }
    Ok((rows, logs))
}

// --------------------------------------------------------- generator check

/// The observables compared against closed forms.
pub fn dynkin_observables(alpha: f64) -> Vec<Observable> {
    vec![
        Observable::Coordinate { i: 1 },
        Observable::Coordinate { i: 2 },
        Observable::GapSum,
        Observable::Lyapunov { alpha },
        Observable::Power { i: 1, k: 2 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynkinRow {
    pub point: u64,
    pub point_seed: u64,
    pub gaps: Vec<f64>,
    pub observable: Observable,
    pub closed_form: f64,
    pub estimate: f64,
    pub se: f64,
    pub bias_allowance: f64,
}

impl DynkinRow {
    pub fn error(&self) -> f64 {
        (self.estimate - self.closed_form).abs()
    }

    /// Within three standard errors plus the bias allowance.
    pub fn pass(&self) -> bool {
        self.error() <= 3.0 * self.se + self.bias_allowance
    }
}

/// Allowance for the `O(h)` bias of a one-sided difference quotient: the
/// bias is `(h/2) L^2 f + O(h^2)`, and `L^2 f` is a polynomial of degree
/// `deg + 2` whose coefficients are at most one in absolute value.
pub fn dynkin_bias_allowance(gaps: &[f64], obs: Observable, h: f64) -> f64 {
    let scale = 1.0 + gaps.iter().sum::<f64>();
    h * scale.powi(obs.degree() as i32 + 2)
}

const CHUNK: u64 = 4096;

/// Dynkin estimates `(E_y f(Y_h) - f(y)) / h` at `points` random states with
/// unit exponential gaps.
pub fn dynkin_check(
    n: usize,
    law: &JumpLaw,
    observables: &[Observable],
    points: u64,
    h: f64,
    replicas: u64,
    seed: u64,
) -> Result<Vec<DynkinRow>, RunError> {
    let mut rows = Vec::new();
    let k = observables.len();
    for p in 0..points {
        let ps = row_seed(seed, p, Role::Initial);
        let mut rng = stream_from_seed(ps);
        let gaps: Vec<f64> = (0..n - 1).map(|_| positive_exp(&mut rng)).collect();
        let f0: Vec<f64> = observables.iter().map(|o| observable_value(&gaps, *o)).collect::<Result<_, _>>()?;
        let chunks = replicas.div_ceil(CHUNK);
        // Per-chunk sums are reduced in chunk order for determinism.
        let parts: Vec<Result<Vec<(f64, f64)>, RunError>> = par_replicas(chunks, |c| {
            let mut acc = vec![(0.0, 0.0); k];
            for r in c * CHUNK..((c + 1) * CHUNK).min(replicas) {
                let mut rng = stream_from_seed(replica_seed(ps, r, Role::Dynamics));
                let mut sim = Simulator::new(SystemState::new(gaps.clone())?, law.clone())?;
                sim.run_until(h, &mut rng, &mut NullObserver)?;
                for (j, o) in observables.iter().enumerate() {
                    let d = observable_value(sim.gaps(), *o)? - f0[j];
                    acc[j].0 += d;
                    acc[j].1 += d * d;
                }
            }
            Ok(acc)
        });
        let mut tot = vec![(0.0, 0.0); k];
        for part in parts {
            for (t, a) in tot.iter_mut().zip(part?) {
                t.0 += a.0;
                t.1 += a.1;
            }
        }
        let nf = replicas as f64;
        for (j, o) in observables.iter().enumerate() {
            let mean = tot[j].0 / nf;
            let var = ((tot[j].1 - nf * mean * mean) / (nf - 1.0)).max(0.0);
            rows.push(DynkinRow {
                point: p,
                point_seed: ps,
                gaps: gaps.clone(),
                observable: *o,
                closed_form: generator_apply(&gaps, *o, law)?,
                estimate: mean / h,
                se: (var / nf).sqrt() / h,
                bias_allowance: dynkin_bias_allowance(&gaps, *o, h),
            });
        }
    }
    Ok(rows)
}

// ----------------------------------------------------------- adjoint check

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointRow {
    pub point: u64,
    pub point_seed: u64,
    pub y: Vec<f64>,
    pub closed_form: f64,
    pub quadrature: f64,
}

impl AdjointRow {
    /// Disagreement between quadrature and the closed form.
    pub fn residual(&self) -> f64 {
        (self.quadrature - self.closed_form).abs()
    }
}

/// Adjoint of the product exponential density with rate `lambda` at random
/// positive points, by closed form and by quadrature.
pub fn adjoint_check(n: usize, lambda: f64, points: u64, tol: f64, seed: u64) -> Result<Vec<AdjointRow>, RunError> {
    let density = if lambda == 1.0 { DensityKind::ProductExpUnit } else { DensityKind::ProductExpRate(lambda) };
    let rows: Vec<Result<AdjointRow, RunError>> = par_replicas(points, |p| {
        let ps = row_seed(seed, p, Role::Initial);
        let mut rng = stream_from_seed(ps);
        let y: Vec<f64> = (0..n - 1).map(|_| positive_exp(&mut rng)).collect();
        Ok(AdjointRow {
            point: p,
            point_seed: ps,
            closed_form: adjoint_apply(&y, &density, AdjointMode::ClosedForm)?,
            quadrature: adjoint_apply(&y, &density, AdjointMode::Quadrature(tol))?,
            y,
        })
    });
    rows.into_iter().collect()
}

// --------------------------------------------------------- stationary test

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryResult {
    pub snapshots: Vec<Snapshot>,
    /// KS against the unit exponential, one per coordinate.
    pub ks: Vec<KsResult>,
    pub phi: MeanVar,
}

impl StationaryResult {
    /// Every marginal passes at level `level / (n - 1)`.
    pub fn marginals_pass(&self, level: f64) -> bool {
        let adj = level / self.ks.len() as f64;
        self.ks.iter().all(|k| k.p > adj)
    }
}

pub fn stationary_test(
    n: usize,
    law: &JumpLaw,
    start: &Start,
    t_end: f64,
    replicas: u64,
    seed: u64,
) -> Result<StationaryResult, RunError> {
    let snapshots = simulate(n, law, start, &[t_end], replicas, seed)?;
    let rows: Vec<Vec<f64>> = snapshots.iter().map(|s| s.gaps.clone()).collect();
    let ks = (0..n - 1).map(|k| ks_test(&column(&rows, k), unit_exp_cdf)).collect::<Result<_, _>>()?;
    let phis: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    Ok(StationaryResult { snapshots, ks, phi: mean_var(&phis) })
}

// ---------------------------------------------------------------- coupling

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupleRow {
    pub time: f64,
    pub replica: u64,
    pub replica_seed: u64,
    pub l1_distance: f64,
    pub coalesced_prefix: usize,
    pub events: u64,
    pub faster_only_events: u64,
    pub sign_violations: u64,
}

/// One line of `couplings.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingLine {
    pub n: usize,
    pub seed: u64,
    pub replica: u64,
    pub replica_seed: u64,
    pub start: String,
    pub tau: Option<f64>,
    pub censored: bool,
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupleResult {
    /// Rows per (grid time, replica); time zero is always included.
    pub rows: Vec<CoupleRow>,
    pub couplings: Vec<CouplingLine>,
    pub t_grid: Vec<f64>,
    /// Per grid time, per coordinate: two-sample KS between the coupled
    /// first system and an independent run from the same start.
    pub marginal_ks: Vec<Vec<KsResult>>,
    /// Mean L1 distance per grid time.
    pub l1: Vec<MeanVar>,
    /// Standard error of the paired change in L1 distance between
    /// consecutive grid times.
    pub l1_step_se: Vec<f64>,
}

impl CoupleResult {
    pub fn total_events(&self) -> u64 {
        self.rows.iter().filter(|r| r.time == *self.t_grid.last().unwrap()).map(|r| r.events).sum()
    }

    pub fn sign_violations(&self) -> u64 {
        self.rows.iter().filter(|r| r.time == *self.t_grid.last().unwrap()).map(|r| r.sign_violations).sum()
    }

    /// Mean L1 distance never rises by more than three paired standard
    /// errors between consecutive grid times.
    pub fn contraction_holds(&self) -> bool {
        self.l1.windows(2).zip(&self.l1_step_se).all(|(w, se)| w[1].mean <= w[0].mean + 3.0 * se)
    }
}

/// Couples a start against fresh stationary draws and records distances on
/// the grid, alongside an independent single-system run from the same start.
pub fn couple(
    n: usize,
    law: &JumpLaw,
    start: &Start,
    t_grid: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<CoupleResult, RunError> {
    let mut grid = vec![0.0];
    grid.extend(t_grid.iter().copied().filter(|t| *t > 0.0));
    let t_max = *grid.last().unwrap();
    type Rep = (Vec<CoupleRow>, Vec<Vec<f64>>, Vec<Vec<f64>>, CouplingLine);
    let reps: Vec<Result<Rep, RunError>> = par_replicas(replicas, |r| {
        let s = row_seed(seed, r, Role::Coupling);
        let mut rng = stream_from_seed(s);
        let y_a = draw_start(start, n, &mut rng)?;
        let y_b = sample_stationary_gaps(n, 1.0, &mut rng)?;
        let mut cs = CoupledState::new(y_a.clone(), y_b.clone(), law.clone())?;
        let mut ind = Simulator::new(SystemState::new(y_a.clone())?, law.clone())?;
        let mut ind_rng = side_stream(s, Role::Dynamics);
        let mut rows = Vec::with_capacity(grid.len());
        let mut coupled = Vec::with_capacity(grid.len());
        let mut single = Vec::with_capacity(grid.len());
        for &t in &grid {
            cs.run_until(t, &mut rng);
            ind.run_until(t, &mut ind_rng, &mut NullObserver)?;
            rows.push(CoupleRow {
                time: t,
                replica: r,
                replica_seed: s,
                l1_distance: cs.l1_distance(),
                coalesced_prefix: cs.coalesced_prefix(),
                events: cs.events(),
                faster_only_events: cs.faster_only_events(),
                sign_violations: cs.sign_violations(),
            });
            coupled.push(cs.gaps_a().to_vec());
            single.push(ind.gaps().to_vec());
        }
        let mut tau_rng = side_stream(s, Role::Auxiliary);
        let out = run_coupling(&y_a, &y_b, law, t_max, &mut tau_rng, false)?;
        let line = CouplingLine {
            n,
            seed,
            replica: r,
            replica_seed: s,
            start: start_label(start),
            tau: out.tau,
            censored: out.censored(),
            events: out.events,
        };
        Ok((rows, coupled, single, line))
    });
    let mut rows = Vec::new();
    let mut coupled = Vec::new();
    let mut single = Vec::new();
    let mut couplings = Vec::new();
    for rep in reps {
        let (r, c, s, l) = rep?;
        rows.push(r);
        coupled.push(c);
        single.push(s);
        couplings.push(l);
    }
    let mut marginal_ks = Vec::with_capacity(grid.len());
    let mut l1 = Vec::with_capacity(grid.len());
    for g in 0..grid.len() {
        let mut per = Vec::with_capacity(n - 1);
        for k in 0..n - 1 {
            let a: Vec<f64> = coupled.iter().map(|c| c[g][k]).collect();
            let b: Vec<f64> = single.iter().map(|c| c[g][k]).collect();
            per.push(ks_two_sample(&a, &b)?);
        }
        marginal_ks.push(per);
        l1.push(mean_var(&rows.iter().map(|r| r[g].l1_distance).collect::<Vec<_>>()));
    }
    let l1_step_se = (1..grid.len())
        .map(|g| mean_var(&rows.iter().map(|r| r[g].l1_distance - r[g - 1].l1_distance).collect::<Vec<_>>()).se())
        .collect();
    let mut flat = Vec::with_capacity(rows.len() * grid.len());
    for g in 0..grid.len() {
        flat.extend(rows.iter().map(|r| r[g].clone()));
    }
    Ok(CoupleResult { rows: flat, couplings, t_grid: grid, marginal_ks, l1, l1_step_se })
}

pub fn start_label(start: &Start) -> String {
    match start {
        Start::Zeros => "zeros".into(),
        Start::Spread { scale } => format!("spread({scale})"),
        Start::Custom { .. } => "custom".into(),
        Start::Stationary { lambda } => format!("stationary({lambda})"),
    }
}

// ------------------------------------------------------------ frozen beta

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrozenRow {
    pub m: usize,
    pub replica: u64,
    pub beta: f64,
    pub censored: bool,
    pub replica_seed: u64,
}

pub fn frozen_seed(seed: u64, m: usize, r: u64) -> u64 {
    replica_seed(replica_seed(seed, m as u64, Role::Frozen), r, Role::Frozen)
}

pub fn frozen_beta(m_list: &[usize], replicas: u64, t_cap: f64, seed: u64) -> Result<Vec<FrozenRow>, RunError> {
    let mut rows = Vec::new();
    for &m in m_list {
        let part: Vec<Result<FrozenRow, RunError>> = par_replicas(replicas, |r| {
            let s = frozen_seed(seed, m, r);
            let out = run_frozen_beta(m, &mut stream_from_seed(s), t_cap)?;
            Ok(FrozenRow { m, replica: r, beta: out.beta, censored: out.censored, replica_seed: s })
        });
        for row in part {
            rows.push(row?);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrozenSummary {
    pub m: Vec<usize>,
    pub mean_beta: Vec<MeanVar>,
    pub censored: u64,
    pub fit: Option<PowerFit>,
}

pub fn frozen_summary(rows: &[FrozenRow]) -> FrozenSummary {
    let mut ms: Vec<usize> = rows.iter().map(|r| r.m).collect();
    ms.dedup();
    let mean_beta: Vec<MeanVar> = ms
        .iter()
        .map(|m| mean_var(&rows.iter().filter(|r| r.m == *m).map(|r| r.beta).collect::<Vec<_>>()))
        .collect();
    let xs: Vec<f64> = ms.iter().map(|m| *m as f64).collect();
    let ys: Vec<f64> = mean_beta.iter().map(|mv| mv.mean).collect();
    FrozenSummary {
        fit: fit_power_law(&xs, &ys).ok(),
        censored: rows.iter().filter(|r| r.censored).count() as u64,
        m: ms,
        mean_beta,
    }
}

// --------------------------------------------------------------- dominance

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceRow {
    pub leader_path: LeaderPath,
    pub m: usize,
    pub replica: u64,
    pub replica_seed: u64,
    pub ok: bool,
    pub events: u64,
    pub z_penultimate: f64,
    pub violation_time: Option<f64>,
    pub violation_index: Option<usize>,
}

pub fn dominance_check(
    m_list: &[usize],
    paths: &[LeaderPath],
    t_end: f64,
    replicas: u64,
    seed: u64,
) -> Result<Vec<DominanceRow>, RunError> {
    let mut rows = Vec::new();
    for (pi, &path) in paths.iter().enumerate() {
        for &m in m_list {
            let root = replica_seed(replica_seed(seed, pi as u64, Role::Dominance), m as u64, Role::Dominance);
            let part: Vec<Result<DominanceRow, RunError>> = par_replicas(replicas, |r| {
                let s = replica_seed(root, r, Role::Dominance);
                let mut rng = stream_from_seed(s);
                let x0 = sample_start(m, &mut rng);
                let out = dominance_run(&x0, path, t_end, &mut rng)?;
                Ok(DominanceRow {
                    leader_path: path,
                    m,
                    replica: r,
                    replica_seed: s,
                    ok: out.ok,
                    events: out.events,
                    z_penultimate: out.z_penultimate,
                    violation_time: out.violation.map(|v| v.time),
                    violation_index: out.violation.map(|v| v.index),
                })
            });
            for row in part {
                rows.push(row?);
            }
        }
    }
    Ok(rows)
}

// -------------------------------------------------------------- heavy tail

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSample {
    pub replica: u64,
    pub replica_seed: u64,
    pub y1: f64,
}

/// First gap after a burn-in of `burn_in` time units from the zero start,
/// one independent sample per replica.
pub fn heavy_tail_samples(
    n: usize,
    law: &JumpLaw,
    burn_in: f64,
    replicas: u64,
    seed: u64,
) -> Result<Vec<TailSample>, RunError> {
    let snaps = simulate(n, law, &Start::Zeros, &[burn_in], replicas, seed)?;
    Ok(snaps.into_iter().map(|s| TailSample { replica: s.replica, replica_seed: s.replica_seed, y1: s.gaps[0] }).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeavyTailSummary {
    /// Hill estimates at the requested fraction and at half and double it.
    pub fractions: Vec<f64>,
    pub hill: Vec<HillEstimate>,
    /// Third-moment running estimates over doubling prefixes of the sample.
    pub prefix_sizes: Vec<usize>,
    pub third_moment: Vec<f64>,
}

impl HeavyTailSummary {
    /// Hill estimate at the central fraction.
    pub fn primary(&self) -> &HillEstimate {
        &self.hill[1]
    }

    /// Relative changes between consecutive third-moment estimates.
    pub fn relative_changes(&self) -> Vec<f64> {
        self.third_moment.windows(2).map(|w| ((w[1] - w[0]) / w[0]).abs()).collect()
    }
}

pub fn heavy_tail_summary(y1: &[f64], k_fraction: f64, doublings: usize) -> Result<HeavyTailSummary, RunError> {
    let fractions = vec![k_fraction / 2.0, k_fraction, k_fraction * 2.0];
    let hill =
        fractions.iter().map(|f| hill_estimator(y1, k_from_fraction(y1.len(), *f))).collect::<Result<Vec<_>, _>>()?;
    let mut prefix_sizes: Vec<usize> = (0..=doublings).map(|j| y1.len() >> (doublings - j)).collect();
    prefix_sizes.retain(|s| *s > 0);
    let third_moment =
        prefix_sizes.iter().map(|&s| y1[..s].iter().map(|y| y * y * y).sum::<f64>() / s as f64).collect();
    Ok(HeavyTailSummary { fractions, hill, prefix_sizes, third_moment })
}

// ------------------------------------------------------------------- fclt

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FcltRow {
    pub replica: u64,
    pub replica_seed: u64,
    pub u: Vec<f64>,
}

/// Profiles `U(x)` of the gap vector at `t_end`.
pub fn fclt_rows(
    n: usize,
    start: &Start,
    t_end: f64,
    x_grid: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<Vec<FcltRow>, RunError> {
    let snaps = simulate(n, &JumpLaw::ExpUnit, start, &[t_end], replicas, seed)?;
    snaps
        .into_iter()
        .map(|s| Ok(FcltRow { replica: s.replica, replica_seed: s.replica_seed, u: fclt_profile(&s.gaps, x_grid)? }))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FcltSummary {
    pub x_grid: Vec<f64>,
    pub moments: Vec<MeanVar>,
    /// Covariance of the first and last grid points.
    pub cov_first_last: f64,
    /// KS of the middle grid point against the normal law with the sample
    /// mean and variance.
    pub ks_middle: KsResult,
    pub middle_x: f64,
}

pub fn fclt_summary(rows: &[FcltRow], x_grid: &[f64]) -> Result<FcltSummary, RunError> {
    let cols: Vec<Vec<f64>> = (0..x_grid.len()).map(|k| rows.iter().map(|r| r.u[k]).collect()).collect();
    let moments: Vec<MeanVar> = cols.iter().map(|c| mean_var(c)).collect();
    let mid = (x_grid.len() - 1) / 2;
    let mv = moments[mid];
    let normal = Normal::new(mv.mean, mv.var.sqrt())
        .map_err(|e| RunError::Invalid(format!("degenerate profile at x = {}: {e}", x_grid[mid])))?;
    Ok(FcltSummary {
        x_grid: x_grid.to_vec(),
        cov_first_last: covariance(&cols[0], &cols[x_grid.len() - 1]),
        ks_middle: ks_test(&cols[mid], |x| normal.cdf(x))?,
        middle_x: x_grid[mid],
        moments,
    })
}

// -------------------------------------------------------------- hitting time

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingRow {
    pub replica: u64,
    pub replica_seed: u64,
    pub tau: f64,
    pub censored: bool,
    pub events: u64,
}

pub fn hitting_times(
    n: usize,
    law: &JumpLaw,
    start: &Start,
    t_cap: f64,
    replicas: u64,
    seed: u64,
) -> Result<Vec<HittingRow>, RunError> {
    let rows: Vec<Result<HittingRow, RunError>> = par_replicas(replicas, |r| {
        let s = row_seed(seed, r, Role::Dynamics);
        let mut rng = stream_from_seed(s);
        let gaps = draw_start(start, n, &mut rng)?;
        let out = hitting_time_tau_c(SystemState::new(gaps)?, law, &mut rng, t_cap)?;
        Ok(HittingRow { replica: r, replica_seed: s, tau: out.tau, censored: out.censored, events: out.events })
    });
    rows.into_iter().collect()
}

/// `P(tau > t)` on the grid; censored runs exceed every grid time below
/// their cap.
pub fn survival(rows: &[HittingRow], t_grid: &[f64]) -> Vec<TailEstimate> {
    t_grid
        .iter()
        .map(|&t| {
            let hits = rows.iter().filter(|r| r.censored || r.tau > t).count();
            TailEstimate::from_counts(hits as u64, rows.len() as u64)
        })
        .collect()
}
