//! Closed forms checked against Monte Carlo and quadrature.

use ftl_core::estimators::{ks_test, mean_var};
use ftl_core::kernel::{NullObserver, Simulator};
use ftl_core::model::{adjoint_apply, generator_apply, observable_value, rescale_gaps, AdjointMode, DensityKind};
use ftl_core::rng::{open01, replica_stream, stream_from_seed, Role};
use ftl_core::{JumpLaw, Observable, SystemState};

#[test]
fn dynkin_estimate_of_squared_first_gap() {
    let gaps = vec![1.0, 1.0, 1.0];
    let obs = Observable::Power { i: 1, k: 2 };
    let exact = generator_apply(&gaps, obs, &JumpLaw::ExpUnit).unwrap();
    assert!((exact - 10.0 / 3.0).abs() < 1e-14);
    let h = 1e-3;
    let f0 = observable_value(&gaps, obs).unwrap();
    let diffs: Vec<f64> = (0..1_000_000)
        .map(|r| {
            let mut rng = replica_stream(31, r, Role::Dynamics);
            let mut sim = Simulator::new(SystemState::new(gaps.clone()).unwrap(), JumpLaw::ExpUnit).unwrap();
            sim.run_until(h, &mut rng, &mut NullObserver).unwrap();
            (observable_value(sim.gaps(), obs).unwrap() - f0) / h
        })
        .collect();
    let mv = mean_var(&diffs);
    // O(h) bias: h (1 + sum y)^(deg + 2) = 1e-3 * 4^4.
    let bias = h * 4f64.powi(4);
    assert!((mv.mean - exact).abs() <= 3.0 * mv.se() + bias, "{mv:?} vs {exact}");
}

#[test]
fn rescaled_unit_exponentials_are_rate_three() {
    let mut rng = stream_from_seed(32);
    let ys: Vec<f64> = (0..10_000)
        .map(|_| {
            let y = vec![-open01(&mut rng).ln(), -open01(&mut rng).ln()];
            rescale_gaps(&y, 3.0).unwrap()[1]
        })
        .collect();
    let ks = ks_test(&ys, |x| if x <= 0.0 { 0.0 } else { -(-3.0 * x).exp_m1() }).unwrap();
    assert!(ks.p > 0.01, "{ks:?}");
}

#[test]
fn adjoint_closed_form_and_quadrature_agree() {
    let mut rng = stream_from_seed(33);
    for n in [3usize, 5, 8] {
        for lambda in [1.0, 0.5, 2.0] {
            let d = DensityKind::ProductExpRate(lambda);
            for _ in 0..20 {
                let y: Vec<f64> = (0..n - 1).map(|_| -open01(&mut rng).ln()).collect();
                let c = adjoint_apply(&y, &d, AdjointMode::ClosedForm).unwrap();
                let q = adjoint_apply(&y, &d, AdjointMode::Quadrature(1e-9)).unwrap();
                assert!((c - q).abs() <= 1e-8, "n={n} lambda={lambda} y={y:?}: {c} vs {q}");
            }
        }
    }
}

#[test]
fn pareto_draws_have_unit_mean() {
    let law = JumpLaw::pareto_unit_mean(2.5).unwrap();
    let mut rng = stream_from_seed(34);
    let xs: Vec<f64> = (0..1_000_000).map(|_| law.sample(open01(&mut rng))).collect();
    let mv = mean_var(&xs);
    assert!((mv.mean - 1.0).abs() <= 3.0 * mv.se(), "{mv:?}");
}
