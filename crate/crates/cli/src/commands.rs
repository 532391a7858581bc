//! One function per command: run the driver and lay out its output files.

use ftl_core::estimators::{tmix_lower_estimate, tmix_upper_with_records, InitKind, TailEstimate, Z95};
use ftl_core::kernel::trajectory::LogFormat;
use ftl_core::Observable;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig, LogKind, Start};
use crate::experiments::{self as ex, CouplingLine};
use crate::{ConfigError, RunError};

/// One line of `estimates.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub op: String,
    pub params: Value,
    pub estimate: Value,
    pub ci: Option<[f64; 2]>,
    pub replicas: u64,
    pub seed: u64,
}

/// Everything a command writes, before it touches the disk.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub estimates: Vec<EstimateRecord>,
    pub couplings: Vec<CouplingLine>,
    /// Extra files relative to the output directory.
    pub files: Vec<(String, Vec<u8>)>,
}

impl Report {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|h| h.to_string()).collect(), ..Default::default() }
    }

    fn estimate(&mut self, cfg: &ExperimentConfig, op: &str, params: Value, estimate: Value, ci: Option<[f64; 2]>) {
        self.estimates.push(EstimateRecord {
            op: op.into(),
            params,
            estimate,
            ci,
            replicas: cfg.replicas,
            seed: cfg.seed,
        });
    }
}

/// Shortest round-trip form, switching to exponent notation for very large
/// or small magnitudes.
fn f(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(f).unwrap_or_default()
}

fn gap_header(base: &[&str], n: usize) -> Vec<String> {
    let mut h: Vec<String> = base.iter().map(|s| s.to_string()).collect();
    h.extend((1..n).map(|i| format!("gap_{i}")));
    h
}

fn normal_ci(mean: f64, se: f64) -> Option<[f64; 2]> {
    (mean.is_finite() && se.is_finite()).then(|| [mean - Z95 * se, mean + Z95 * se])
}

fn wilson(t: &TailEstimate) -> Option<[f64; 2]> {
    Some([t.ci_low, t.ci_high])
}

pub fn observable_label(o: &Observable) -> String {
    match o {
        Observable::Coordinate { i } => format!("coordinate({i})"),
        Observable::GapSum => "gap_sum".into(),
        Observable::Lyapunov { alpha } => format!("lyapunov({alpha})"),
        Observable::Power { i, k } => format!("power({i},{k})"),
    }
}

/// Default grid of the upper mixing estimate: `1.06^k`, `k = 0..=120`.
pub fn default_upper_grid() -> Vec<f64> {
    (0..=120).map(|k| 1.06f64.powi(k)).collect()
}

/// Default grid of the lower mixing estimate: `k n / 40`, `k = 0..=200`.
pub fn default_lower_grid(n: usize) -> Vec<f64> {
    (0..=200).map(|k| k as f64 * n as f64 / 40.0).collect()
}

/// Runs the configured command on the current rayon pool.
pub fn run_command(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let command = cfg.command.ok_or_else(|| RunError::Invalid(ConfigError::MissingCommand.to_string()))?;
    match command {
        Command::Simulate => simulate(cfg),
        Command::GeneratorCheck => generator_check(cfg),
        Command::AdjointCheck => adjoint_check(cfg),
        Command::StationaryTest => stationary_test(cfg),
        Command::Couple => couple(cfg),
        Command::TmixUpper => tmix_upper(cfg),
        Command::TmixLower => tmix_lower(cfg),
        Command::FrozenBeta => frozen_beta(cfg),
        Command::DominanceCheck => dominance_check(cfg),
        Command::HeavyTail => heavy_tail(cfg),
        Command::Fclt => fclt(cfg),
        Command::HittingTime => hitting_time(cfg),
    }
}

fn start_or(cfg: &ExperimentConfig, default: Start) -> Start {
    cfg.start.clone().unwrap_or(default)
}

fn simulate(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = cfg.t_grid.clone().unwrap_or_else(|| vec![cfg.t_end]);
    let start = start_or(cfg, Start::Zeros);
    let log = match cfg.log {
        LogKind::None => None,
        LogKind::Csv => Some(LogFormat::Csv),
        LogKind::Binary => Some(LogFormat::Binary),
    };
    let (snaps, logs) = ex::simulate_logged(cfg.n, &cfg.law, &start, &grid, cfg.replicas, cfg.seed, log)?;
    let mut rep = Report {
        header: gap_header(&["replica", "replica_seed", "time", "events", "leader_pos"], cfg.n),
        ..Default::default()
    };
    // Rows sorted by (grid point, replica).
    for (g, t) in grid.iter().enumerate() {
        for s in snaps.iter().skip(g).step_by(grid.len()) {
            let mut row = vec![s.replica.to_string(), s.replica_seed.to_string(), f(*t), s.events.to_string(), f(s.leader_pos)];
            row.extend(s.gaps.iter().map(|x| f(*x)));
            rep.rows.push(row);
        }
        let disp: Vec<f64> = snaps.iter().skip(g).step_by(grid.len()).map(|s| s.leader_pos).collect();
        let mv = ftl_core::estimators::mean_var(&disp);
        rep.estimate(cfg, "leader_displacement", json!({"t": t, "n": cfg.n}), json!(mv.mean), normal_ci(mv.mean, mv.se()));
    }
    let ext = if cfg.log == LogKind::Csv { "csv" } else { "bin" };
    for (r, bytes) in logs.into_iter().enumerate() {
        rep.files.push((format!("trajectories/replica_{r}.{ext}"), bytes));
    }
    Ok(rep)
}

fn generator_check(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let obs = ex::dynkin_observables(cfg.alpha);
    let rows = ex::dynkin_check(cfg.n, &cfg.law, &obs, cfg.points as u64, cfg.h, cfg.replicas, cfg.seed)?;
    let mut rep = Report::new(&[
        "point",
        "point_seed",
        "observable",
        "closed_form",
        "estimate",
        "se",
        "bias_allowance",
        "pass",
    ]);
    for r in &rows {
        rep.rows.push(vec![
            r.point.to_string(),
            r.point_seed.to_string(),
            observable_label(&r.observable),
            f(r.closed_form),
            f(r.estimate),
            f(r.se),
            f(r.bias_allowance),
            r.pass().to_string(),
        ]);
        rep.estimate(
            cfg,
            "generator_dynkin",
            json!({"n": cfg.n, "h": cfg.h, "point": r.point, "gaps": r.gaps, "observable": observable_label(&r.observable), "closed_form": r.closed_form}),
            json!(r.estimate),
            normal_ci(r.estimate, r.se),
        );
    }
    Ok(rep)
}

fn adjoint_check(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let rows = ex::adjoint_check(cfg.n, cfg.lambda, cfg.points as u64, cfg.tol, cfg.seed)?;
    let mut rep = Report::new(&["point", "point_seed", "y", "closed_form", "quadrature", "residual"]);
    let mut worst: f64 = 0.0;
    for r in &rows {
        let y: Vec<String> = r.y.iter().map(|v| f(*v)).collect();
        rep.rows.push(vec![
            r.point.to_string(),
            r.point_seed.to_string(),
            y.join(";"),
            f(r.closed_form),
            f(r.quadrature),
            f(r.residual()),
        ]);
        worst = worst.max(r.residual());
    }
    rep.estimate(
        cfg,
        "adjoint_max_residual",
        json!({"n": cfg.n, "lambda": cfg.lambda, "points": cfg.points, "tol": cfg.tol}),
        json!(worst),
        None,
    );
    Ok(rep)
}

fn stationary_test(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let start = start_or(cfg, Start::Stationary { lambda: 1.0 });
    let res = ex::stationary_test(cfg.n, &cfg.law, &start, cfg.t_end, cfg.replicas, cfg.seed)?;
    let mut rep = Report { header: gap_header(&["replica", "replica_seed", "phi"], cfg.n), ..Default::default() };
    for s in &res.snapshots {
        let mut row = vec![s.replica.to_string(), s.replica_seed.to_string(), f(s.gaps.iter().sum())];
        row.extend(s.gaps.iter().map(|x| f(*x)));
        rep.rows.push(row);
    }
    for (k, ks) in res.ks.iter().enumerate() {
        rep.estimate(cfg, "ks_marginal_exp1", json!({"coordinate": k + 1, "t": cfg.t_end}), json!({"d": ks.d, "p": ks.p}), None);
    }
    let phi = res.phi;
    rep.estimate(cfg, "phi_mean", json!({"t": cfg.t_end, "stationary": cfg.n - 1}), json!(phi.mean), normal_ci(phi.mean, phi.se()));
    rep.estimate(cfg, "phi_variance", json!({"t": cfg.t_end, "stationary": cfg.n - 1}), json!(phi.var), None);
    Ok(rep)
}

fn couple(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let start = start_or(cfg, Start::Zeros);
    let grid = cfg.t_grid.clone().unwrap_or_else(|| vec![1.0, 5.0, 10.0]);
    let res = ex::couple(cfg.n, &cfg.law, &start, &grid, cfg.replicas, cfg.seed)?;
    let mut rep = Report::new(&[
        "time",
        "replica",
        "replica_seed",
        "l1_distance",
        "coalesced_prefix",
        "events",
        "faster_only_events",
        "sign_violations",
    ]);
    for r in &res.rows {
        rep.rows.push(vec![
            f(r.time),
            r.replica.to_string(),
            r.replica_seed.to_string(),
            f(r.l1_distance),
            r.coalesced_prefix.to_string(),
            r.events.to_string(),
            r.faster_only_events.to_string(),
            r.sign_violations.to_string(),
        ]);
    }
    for (g, t) in res.t_grid.iter().enumerate() {
        let mv = res.l1[g];
        rep.estimate(cfg, "coupled_l1_distance", json!({"t": t}), json!(mv.mean), normal_ci(mv.mean, mv.se()));
        let p: Vec<f64> = res.marginal_ks[g].iter().map(|k| k.p).collect();
        rep.estimate(cfg, "ks_coupled_vs_independent", json!({"t": t}), json!({"p": p}), None);
    }
    rep.estimate(
        cfg,
        "faster_stays_faster",
        json!({"t": res.t_grid.last()}),
        json!({"events": res.total_events(), "sign_violations": res.sign_violations()}),
        None,
    );
    rep.couplings = res.couplings;
    Ok(rep)
}

fn tmix_upper(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = cfg.t_grid.clone().unwrap_or_else(default_upper_grid);
    let (est, recs) = tmix_upper_with_records(cfg.n, &grid, cfg.replicas, cfg.seed)?;
    let mut rep = Report::new(&["t", "p_hat", "ci_low", "ci_high", "replicas"]);
    for (t, e) in grid.iter().zip(&est.tails) {
        rep.rows.push(vec![f(*t), f(e.p_hat), f(e.ci_low), f(e.ci_high), e.replicas.to_string()]);
    }
    rep.estimate(
        cfg,
        "t_mix_upper",
        json!({"n": cfg.n, "threshold": 0.25, "starts": ["zeros", "spread(10)"]}),
        json!(est.t_mix_upper),
        None,
    );
    for (init, rs) in recs {
        let label = match init {
            InitKind::Zeros => "zeros".to_string(),
            InitKind::Spread { scale } => format!("spread({scale})"),
            InitKind::Custom { .. } => "custom".to_string(),
        };
        rep.couplings.extend(rs.into_iter().map(|r| CouplingLine {
            n: cfg.n,
            seed: cfg.seed,
            replica: r.replica,
            replica_seed: r.replica_seed,
            start: label.clone(),
            tau: r.tau,
            censored: r.tau.is_none(),
            events: r.events,
        }));
    }
    Ok(rep)
}

fn tmix_lower(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let grid = cfg.t_grid.clone().unwrap_or_else(|| default_lower_grid(cfg.n));
    let est = tmix_lower_estimate(cfg.n, cfg.delta, &grid, cfg.replicas, cfg.seed)?;
    let mut rep = Report::new(&["t", "phi_mean", "phi_var", "lower_bound"]);
    for ((t, mv), b) in grid.iter().zip(&est.phi).zip(&est.lower_bounds) {
        rep.rows.push(vec![f(*t), f(mv.mean), f(mv.var), f(*b)]);
    }
    rep.estimate(
        cfg,
        "t_mix_lower",
        json!({"n": cfg.n, "delta": cfg.delta, "threshold": 0.25}),
        json!(est.t_mix_lower),
        None,
    );
    Ok(rep)
}

fn frozen_beta(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let rows = ex::frozen_beta(&cfg.m_list, cfg.replicas, cfg.t_cap, cfg.seed)?;
    let mut rep = Report::new(&["m", "replica", "beta", "censored", "replica_seed"]);
    for r in &rows {
        rep.rows.push(vec![r.m.to_string(), r.replica.to_string(), f(r.beta), r.censored.to_string(), r.replica_seed.to_string()]);
    }
    let sum = ex::frozen_summary(&rows);
    for (m, mv) in sum.m.iter().zip(&sum.mean_beta) {
        rep.estimate(cfg, "frozen_beta_mean", json!({"m": m, "t_cap": cfg.t_cap}), json!(mv.mean), normal_ci(mv.mean, mv.se()));
    }
    if let Some(fit) = sum.fit {
        let ci = normal_ci(fit.exponent, fit.exponent_se);
        rep.estimate(cfg, "frozen_beta_exponent", json!({"m_list": cfg.m_list}), json!(fit.exponent), ci);
    }
    Ok(rep)
}

fn dominance_check(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let rows = ex::dominance_check(&cfg.m_list, &cfg.leader_paths, cfg.t_end, cfg.replicas, cfg.seed)?;
    let mut rep = Report::new(&[
        "leader_path",
        "m",
        "replica",
        "replica_seed",
        "ok",
        "events",
        "z_penultimate",
        "violation_time",
        "violation_index",
    ]);
    for r in &rows {
        rep.rows.push(vec![
            path_label(r.leader_path).into(),
            r.m.to_string(),
            r.replica.to_string(),
            r.replica_seed.to_string(),
            r.ok.to_string(),
            r.events.to_string(),
            f(r.z_penultimate),
            opt(r.violation_time),
            r.violation_index.map(|i| i.to_string()).unwrap_or_default(),
        ]);
    }
    for path in &cfg.leader_paths {
        for m in &cfg.m_list {
            let sel = rows.iter().filter(|r| r.leader_path == *path && r.m == *m);
            let bad = sel.filter(|r| !r.ok).count();
            rep.estimate(cfg, "dominance_violations", json!({"leader_path": path_label(*path), "m": m, "t": cfg.t_end}), json!(bad), None);
        }
    }
    Ok(rep)
}

fn path_label(p: ftl_core::coupling::LeaderPath) -> &'static str {
    match p {
        ftl_core::coupling::LeaderPath::Frozen => "frozen",
        ftl_core::coupling::LeaderPath::ExpUnit => "exp_unit",
    }
}

/// Burn-in time used by `heavy-tail`.
pub fn burn_in(cfg: &ExperimentConfig) -> f64 {
    cfg.burn_in_factor * cfg.n as f64
}

fn heavy_tail(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let t = burn_in(cfg);
    let samples = ex::heavy_tail_samples(cfg.n, &cfg.law, t, cfg.replicas, cfg.seed)?;
    let mut rep = Report::new(&["replica", "replica_seed", "y1"]);
    for s in &samples {
        rep.rows.push(vec![s.replica.to_string(), s.replica_seed.to_string(), f(s.y1)]);
    }
    let y1: Vec<f64> = samples.iter().map(|s| s.y1).collect();
    let sum = ex::heavy_tail_summary(&y1, cfg.k_fraction, 4)?;
    for (fr, h) in sum.fractions.iter().zip(&sum.hill) {
        rep.estimate(
            cfg,
            "hill_tail_index",
            json!({"k_fraction": fr, "k": h.k, "burn_in": t, "unbounded": h.unbounded}),
            json!(h.alpha),
            Some([h.lower_95(), f64::INFINITY]),
        );
    }
    for (s, m) in sum.prefix_sizes.iter().zip(&sum.third_moment) {
        rep.estimate(cfg, "third_moment_running", json!({"samples": s}), json!(m), None);
    }
    Ok(rep)
}

fn fclt(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let start = start_or(cfg, Start::Stationary { lambda: 1.0 });
    let rows = ex::fclt_rows(cfg.n, &start, cfg.t_end, &cfg.x_grid, cfg.replicas, cfg.seed)?;
    let mut header = vec!["replica".to_string(), "replica_seed".to_string()];
    header.extend(cfg.x_grid.iter().map(|x| format!("u_{x}")));
    let mut rep = Report { header, ..Default::default() };
    for r in &rows {
        let mut row = vec![r.replica.to_string(), r.replica_seed.to_string()];
        row.extend(r.u.iter().map(|v| f(*v)));
        rep.rows.push(row);
    }
    let sum = ex::fclt_summary(&rows, &cfg.x_grid)?;
    for (x, mv) in sum.x_grid.iter().zip(&sum.moments) {
        rep.estimate(cfg, "fclt_mean", json!({"x": x, "t": cfg.t_end}), json!(mv.mean), normal_ci(mv.mean, mv.se()));
        rep.estimate(cfg, "fclt_variance", json!({"x": x, "t": cfg.t_end}), json!(mv.var), None);
    }
    let (a, b) = (sum.x_grid[0], *sum.x_grid.last().unwrap());
    rep.estimate(cfg, "fclt_covariance", json!({"x": [a, b], "t": cfg.t_end}), json!(sum.cov_first_last), None);
    rep.estimate(
        cfg,
        "ks_normal_moment_matched",
        json!({"x": sum.middle_x, "t": cfg.t_end}),
        json!({"d": sum.ks_middle.d, "p": sum.ks_middle.p}),
        None,
    );
    Ok(rep)
}

fn hitting_time(cfg: &ExperimentConfig) -> Result<Report, RunError> {
    let start = start_or(cfg, Start::Spread { scale: 100.0 });
    let rows = ex::hitting_times(cfg.n, &cfg.law, &start, cfg.t_cap, cfg.replicas, cfg.seed)?;
    let mut rep = Report::new(&["replica", "replica_seed", "tau", "censored", "events"]);
    for r in &rows {
        rep.rows.push(vec![r.replica.to_string(), r.replica_seed.to_string(), f(r.tau), r.censored.to_string(), r.events.to_string()]);
    }
    let grid = cfg.t_grid.clone().unwrap_or_else(|| vec![2.0, 4.0, 8.0]);
    for (t, s) in grid.iter().zip(ex::survival(&rows, &grid)) {
        rep.estimate(cfg, "hitting_survival", json!({"t": t, "start": ex::start_label(&start)}), json!(s.p_hat), wilson(&s));
    }
    Ok(rep)
}
