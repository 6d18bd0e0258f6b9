use cdnn_core::data::{oracle_of, DgpFamily};
use cdnn_core::rng;
use cdnn_core::theory::{
    check_consistency, gateaux_derivative, marginal_outcome, marginal_outcome_mc,
    moment_at_truth, non_orthogonal_control, residualized_h, score_psi, standard_directions,
    Direction, GateauxMethod, MonteCarloConfig, NuisanceOracle, NuisancePerturbation,
    RandomOracle, ScoreInput, IDENTITY_TOLERANCE,
};
use cdnn_core::Error;
use proptest::prelude::*;
use rand::Rng;

fn probe_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::seeded(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| r.random_range(-1.5..1.5)).collect())
        .collect()
}

#[test]
fn lemma_holds_for_random_oracles() {
    let mut r = rng::seeded(2024);
    for _ in 0..1000 {
        let dim = r.random_range(1..6);
        let o = RandomOracle::draw(dim, &mut r);
        let x: Vec<f64> = (0..dim).map(|_| r.random_range(-2.0..2.0)).collect();
        for treated in [false, true] {
            let h = residualized_h(&o, treated, &x).unwrap();
            assert!((h.direct - h.lemma).abs() <= IDENTITY_TOLERANCE);
        }
        assert!((marginal_outcome(&o, &x) - o.g0(&x)).abs() <= IDENTITY_TOLERANCE);
        check_consistency(&o, &x).unwrap();
    }
}

#[test]
fn moment_vanishes_at_truth() {
    let o = oracle_of(&DgpFamily::ConfoundHetero.spec(1)).unwrap();
    for (k, x) in probe_points(5, 5, 3).iter().enumerate() {
        let m = moment_at_truth(&o, x, &MonteCarloConfig::new(20_000, k as u64)).unwrap();
        assert!(m.within(4.0), "{m:?}");
    }
}

#[test]
fn monte_carlo_mean_outcome_matches_mixture() {
    let o = oracle_of(&DgpFamily::ConfoundLinear.spec(1)).unwrap();
    let x = [0.5, -1.0, 0.2, 0.0, 1.0];
    let est = marginal_outcome_mc(&o, &x, &MonteCarloConfig::new(50_000, 9)).unwrap();
    assert!((est.estimate - marginal_outcome(&o, &x)).abs() <= 4.0 * est.mc_stderr);
}

#[test]
fn gateaux_derivatives_vanish_in_every_direction() {
    let o = oracle_of(&DgpFamily::ConfoundHetero.spec(2)).unwrap();
    let dirs = standard_directions(5);
    let mut within = 0;
    let mut total = 0;
    for (k, x) in probe_points(5, 4, 5).iter().enumerate() {
        for (j, p) in dirs.iter().enumerate() {
            let mc = MonteCarloConfig::new(10_000, (k * 10 + j) as u64);
            let fd = gateaux_derivative(&o, p, x, &mc, GateauxMethod::FiniteDifference).unwrap();
            let exact = gateaux_derivative(&o, p, x, &mc, GateauxMethod::Analytic).unwrap();
            assert_eq!(exact.estimate, 0.0);
            total += 1;
            within += usize::from(fd.within(3.0));
        }
    }
    assert!(within * 100 >= 95 * total, "{within}/{total}");
}

#[test]
fn non_orthogonal_score_is_sensitive() {
    let o = oracle_of(&DgpFamily::ConfoundLinear.spec(3)).unwrap();
    for (k, x) in probe_points(5, 5, 7).iter().enumerate() {
        for c in [0.5, -0.5, 1.0] {
            let p = NuisancePerturbation::outcome(Direction::Constant(c));
            let mc = MonteCarloConfig::new(10_000, k as u64);
            let est = non_orthogonal_control(&o, &p, x, &mc).unwrap();
            assert!(!est.within(3.0), "{est:?}");
            // derivative is -c e0(x)
            assert!((est.estimate + c * o.e0(x)).abs() <= 4.0 * est.mc_stderr + 1e-9);
        }
    }
}

#[test]
fn perturbations_outside_the_unit_interval_are_rejected() {
    let o = oracle_of(&DgpFamily::ConfoundLinear.spec(3)).unwrap();
    let p = NuisancePerturbation {
        delta_g: Direction::Zero,
        delta_e: Direction::Constant(2.0),
    };
    let err = gateaux_derivative(
        &o,
        &p,
        &[0.0; 5],
        &MonteCarloConfig::new(10_000, 0),
        GateauxMethod::Analytic,
    )
    .unwrap_err();
    assert!(matches!(err, Error::InvalidPerturbation { .. }));
    let zero = gateaux_derivative(
        &o,
        &NuisancePerturbation::zero(),
        &[0.0; 5],
        &MonteCarloConfig::new(10_000, 0),
        GateauxMethod::FiniteDifference,
    )
    .unwrap();
    assert_eq!(zero.estimate, 0.0);
}

proptest! {
    #[test]
    fn score_is_linear_in_theta(
        y in -10.0f64..10.0,
        treated in any::<bool>(),
        g in -5.0f64..5.0,
        e in 0.05f64..0.95,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let w = ScoreInput { y, treated, x: vec![0.0] };
        let mid = score_psi(&w, 0.5 * (a + b), g, e);
        let avg = 0.5 * (score_psi(&w, a, g, e) + score_psi(&w, b, g, e));
        prop_assert!((mid - avg).abs() <= 1e-10 * (1.0 + mid.abs()));
    }
}
