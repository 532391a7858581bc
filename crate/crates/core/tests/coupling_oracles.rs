//! Coupling and dominance checks against hand-computed rates and against
//! the single-system kernels.

use ftl_core::coupling::{
    dominance_run, run_coupling, sample_start, sample_stationary_gaps, CoupledKind, CoupledState, LeaderPath,
};
use ftl_core::estimators::{ks_test, ks_two_sample, mean_var};
use ftl_core::kernel::{FrozenState, NullObserver, Simulator};
use ftl_core::rng::{exp_holding, replica_stream, stream_from_seed, Role};
use ftl_core::{JumpLaw, SystemState};

#[test]
fn pair_selection_and_faster_only_frequencies() {
    // Gaps (1, 0) against (3, 0): pair 1 has weight max(1, 3) = 3 against the
    // leader's 1, and fires faster-only with probability 2/3.
    let mut rng = stream_from_seed(21);
    let draws = 1_000_000;
    let (mut pair1, mut faster) = (0u64, 0u64);
    for _ in 0..draws {
        let mut cs = CoupledState::new(vec![1.0, 0.0], vec![3.0, 0.0], JumpLaw::ExpUnit).unwrap();
        match cs.step(&mut rng).kind {
            CoupledKind::FasterOnly { pair: 1, .. } => {
                pair1 += 1;
                faster += 1;
            }
            CoupledKind::Coalescence { pair: 1 } => pair1 += 1,
            CoupledKind::Leader => {}
            other => panic!("pair 2 has zero weight: {other:?}"),
        }
    }
    let p = pair1 as f64 / draws as f64;
    assert!((p - 0.75).abs() <= 3.0 * (0.75f64 * 0.25 / draws as f64).sqrt(), "{p}");
    let q = faster as f64 / pair1 as f64;
    assert!((q - 2.0 / 3.0).abs() <= 3.0 * (2.0 / 9.0 / pair1 as f64).sqrt(), "{q}");
}

#[test]
fn identical_starts_couple_at_time_zero() {
    let mut rng = stream_from_seed(22);
    let y = vec![0.4, 2.0, 1.0];
    let out = run_coupling(&y, &y, &JumpLaw::ExpUnit, 10.0, &mut rng, false).unwrap();
    assert_eq!(out.tau, Some(0.0));
}

#[test]
fn two_particle_survival_strictly_decreases() {
    let taus: Vec<Option<f64>> = (0..10_000)
        .map(|r| {
            let mut rng = replica_stream(23, r, Role::Coupling);
            run_coupling(&[0.0], &[5.0], &JumpLaw::ExpUnit, 100.0, &mut rng, false).unwrap().tau
        })
        .collect();
    let surv: Vec<usize> = [0.05, 0.1, 0.2, 0.4, 0.8, 1.6]
        .iter()
        .map(|t| taus.iter().filter(|x| x.is_none_or(|v| v > *t)).count())
        .collect();
    assert!(surv.windows(2).all(|w| w[1] < w[0]), "{surv:?}");
}

#[test]
fn coupled_marginal_matches_independent_run() {
    let t = 5.0;
    let n = 4;
    let (mut coupled, mut single) = (vec![Vec::new(); n - 1], vec![Vec::new(); n - 1]);
    for r in 0..10_000 {
        let mut rng = replica_stream(24, r, Role::Coupling);
        let y_b = sample_stationary_gaps(n, 1.0, &mut rng).unwrap();
        let mut cs = CoupledState::new(vec![0.0; n - 1], y_b, JumpLaw::ExpUnit).unwrap();
        cs.run_until(t, &mut rng);
        let mut rng = replica_stream(24, r, Role::Dynamics);
        let mut sim = Simulator::new(SystemState::zeros(n).unwrap(), JumpLaw::ExpUnit).unwrap();
        sim.run_until(t, &mut rng, &mut NullObserver).unwrap();
        for k in 0..n - 1 {
            coupled[k].push(cs.gaps_a()[k]);
            single[k].push(sim.gaps()[k]);
        }
    }
    for k in 0..n - 1 {
        let ks = ks_two_sample(&coupled[k], &single[k]).unwrap();
        assert!(ks.p > 0.01, "coordinate {}: {ks:?}", k + 1);
    }
}

#[test]
fn stationary_second_system_stays_exponential() {
    // The second system starts stationary, so each of its marginals stays
    // unit exponential however the first one starts.
    let samples: Vec<f64> = (0..10_000)
        .map(|r| {
            let mut rng = replica_stream(25, r, Role::Coupling);
            let y_b = sample_stationary_gaps(5, 1.0, &mut rng).unwrap();
            let mut cs = CoupledState::new(vec![10.0; 4], y_b, JumpLaw::ExpUnit).unwrap();
            cs.run_until(3.0, &mut rng);
            cs.gaps_b()[2]
        })
        .collect();
    let ks = ks_test(&samples, |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() }).unwrap();
    assert!(ks.p > 0.01, "{ks:?}");
}

#[test]
fn l1_distance_contracts_in_mean() {
    let y_a = vec![3.0, 0.0, 1.0, 0.0, 2.0];
    let y_b = vec![0.0, 2.0, 0.5, 4.0, 0.0];
    let d0: f64 = y_a.iter().zip(&y_b).map(|(a, b): (&f64, &f64)| (a - b).abs()).sum();
    let grid = [1.0, 5.0, 10.0];
    let mut at = vec![Vec::new(); grid.len()];
    for r in 0..10_000 {
        let mut rng = replica_stream(26, r, Role::Coupling);
        let mut cs = CoupledState::new(y_a.clone(), y_b.clone(), JumpLaw::ExpUnit).unwrap();
        for (g, t) in grid.iter().enumerate() {
            cs.run_until(*t, &mut rng);
            at[g].push(cs.l1_distance());
        }
    }
    for col in &at {
        let mv = mean_var(col);
        assert!(mv.mean <= d0 + 3.0 * mv.se(), "{mv:?} vs {d0}");
    }
}

#[test]
fn faster_stays_faster_over_many_events() {
    let mut violations = 0;
    let mut faster_only = 0;
    for r in 0..2000 {
        let mut rng = replica_stream(27, r, Role::Coupling);
        let y_b = sample_stationary_gaps(6, 1.0, &mut rng).unwrap();
        let mut cs = CoupledState::new(vec![4.0, 0.0, 0.0, 7.0, 0.1], y_b, JumpLaw::ExpUnit).unwrap();
        for _ in 0..100 {
            cs.step(&mut rng);
        }
        violations += cs.sign_violations();
        faster_only += cs.faster_only_events();
    }
    assert!(faster_only > 10_000);
    assert_eq!(violations, 0);
}

#[test]
fn dominance_holds_for_both_leader_paths() {
    for (k, leader) in [LeaderPath::Frozen, LeaderPath::ExpUnit].into_iter().enumerate() {
        for r in 0..300 {
            let mut rng = replica_stream(28 + k as u64, r, Role::Dominance);
            let x0 = sample_start(8, &mut rng);
            let out = dominance_run(&x0, leader, 50.0, &mut rng).unwrap();
            assert!(out.ok, "{leader:?} replica {r}: {:?}", out.violation);
        }
    }
}

/// `Z_{m-1}(t)` from a standalone frozen-boundaries run.
fn frozen_penultimate(m: usize, t: f64, seed: u64) -> f64 {
    let mut rng = stream_from_seed(seed);
    let mut s = FrozenState::new(m).unwrap();
    loop {
        let rate = s.rate();
        if rate <= 0.0 {
            break;
        }
        let dt = exp_holding(&mut rng, rate);
        if s.clock + dt > t {
            break;
        }
        s.clock += dt;
        s.jump(&mut rng);
    }
    s.penultimate()
}

#[test]
fn thinned_frozen_marginal_matches_standalone_process() {
    let (m, t, reps) = (8, 20.0, 4000u64);
    for (k, leader) in [LeaderPath::Frozen, LeaderPath::ExpUnit].into_iter().enumerate() {
        let thinned: Vec<f64> = (0..reps)
            .map(|r| {
                let mut rng = replica_stream(40 + k as u64, r, Role::Dominance);
                let x0 = sample_start(m, &mut rng);
                dominance_run(&x0, leader, t, &mut rng).unwrap().z_penultimate
            })
            .collect();
        let direct: Vec<f64> = (0..reps).map(|r| frozen_penultimate(m, t, 9_000_000 + r)).collect();
        let (a, b) = (mean_var(&thinned), mean_var(&direct));
        let se = (a.se().powi(2) + b.se().powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= 3.0 * se, "{leader:?}: {a:?} vs {b:?}");
    }
}
