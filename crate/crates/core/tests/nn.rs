use cdnn_core::nn::{
    gradient_check, logistic, train, Activation, Architecture, FreezeMask, LayerSpec, Network,
    OptimizerConfig, RegressionSet, TrainConfig, TreatmentInit,
};
use cdnn_core::rng;
use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

/// Straight-line forward pass reading parameters by layout: per layer, the
/// row-major `(out, in)` weight block followed by the biases.
fn oracle_forward(net: &Network, x: &[f64], t: f64) -> f64 {
    let raw: Vec<f64> = x.iter().copied().chain([t]).collect();
    let p = net.params();
    let mut offset = 0;
    let mut h: Vec<f64> = Vec::new();
    for (l, spec) in net.layers().iter().enumerate() {
        let input: Vec<f64> = if l == 0 {
            raw.clone()
        } else if net.concat_to_all_layers() {
            h.iter().copied().chain(raw.iter().copied()).collect()
        } else {
            h.clone()
        };
        assert_eq!(input.len(), spec.input_width);
        let bias_start = offset + spec.input_width * spec.output_width;
        let mut out = Vec::with_capacity(spec.output_width);
        for o in 0..spec.output_width {
            let mut z = p[bias_start + o];
            for i in 0..spec.input_width {
                z += p[offset + o * spec.input_width + i] * input[i];
            }
            out.push(match spec.activation {
                Activation::Swish => z / (1.0 + (-z).exp()),
                Activation::Identity => z,
            });
        }
        offset = bias_start + spec.output_width;
        h = out;
    }
    h[0]
}

fn random_batch(d: usize, n: usize, seed: u64) -> RegressionSet {
    let mut r = rng::seeded(seed);
    let x = Array2::from_shape_fn((n, d), |_| r.random_range(-2.0..2.0));
    let t = (0..n).map(|_| f64::from(r.random_range(0..2u8))).collect();
    let y = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
    RegressionSet::new(x, t, y).unwrap()
}

#[test]
fn forward_matches_straight_line_oracle() {
    for seed in 0..10u64 {
        let mut r = rng::seeded(seed);
        for concat in [false, true] {
            let mut arch = Architecture::new(3, vec![5, 4]);
            arch.concat_to_all_layers = concat;
            let net = Network::init(&arch, TreatmentInit::Uniform(0.5), &mut r).unwrap();
            for _ in 0..20 {
                let x: Vec<f64> = (0..3).map(|_| r.random_range(-3.0..3.0)).collect();
                let t = f64::from(r.random_range(0..2u8));
                let (got, _) = net.forward(&x, t).unwrap();
                let want = oracle_forward(&net, &x, t);
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
            }
        }
    }
}

#[test]
fn logistic_is_stable_at_extremes() {
    assert_eq!(logistic(800.0), 1.0);
    assert_eq!(logistic(-800.0), 0.0);
    assert!((logistic(0.0) - 0.5).abs() == 0.0);
}

#[test]
fn gradients_match_finite_differences_over_twenty_networks() {
    for seed in 0..20u64 {
        let mut r = rng::seeded(1000 + seed);
        let d = 2 + (seed as usize % 4);
        let widths = vec![3 + seed as usize % 5, 4];
        let mut arch = Architecture::new(d, widths);
        arch.concat_to_all_layers = seed % 3 == 0;
        let net = Network::init(&arch, TreatmentInit::Uniform(0.5), &mut r).unwrap();
        let report = gradient_check(&net, &random_batch(d, 8, seed)).unwrap();
        assert!(
            report.max_relative_error <= 1e-4,
            "seed {seed}: {report:?}"
        );
        assert_eq!(report.parameters_checked, net.param_count());
    }
}

#[test]
fn linear_network_gradients_are_near_exact() {
    let mut r = rng::seeded(3);
    let arch = Architecture {
        hidden_activation: Activation::Identity,
        ..Architecture::new(4, vec![3])
    };
    let net = Network::init(&arch, TreatmentInit::Uniform(0.5), &mut r).unwrap();
    let report = gradient_check(&net, &random_batch(4, 10, 4)).unwrap();
    assert!(report.max_relative_error <= 1e-7, "{report:?}");
}

#[test]
fn three_layer_swish_network_of_sixty_four_parameters() {
    let layers = vec![
        LayerSpec { input_width: 3, output_width: 6, activation: Activation::Swish },
        LayerSpec { input_width: 6, output_width: 4, activation: Activation::Swish },
        LayerSpec { input_width: 4, output_width: 3, activation: Activation::Swish },
        LayerSpec { input_width: 3, output_width: 1, activation: Activation::Identity },
    ];
    let mut net = Network::from_layers(2, false, layers).unwrap();
    let mut r = rng::seeded(64);
    let params = (0..net.param_count()).map(|_| r.random_range(-1.0..1.0)).collect();
    net.set_params(params).unwrap();
    assert_eq!(net.param_count(), 24 + 28 + 15 + 4);
    let report = gradient_check(&net, &random_batch(2, 12, 5)).unwrap();
    assert!(report.max_relative_error <= 1e-4, "{report:?}");
}

#[test]
fn frozen_treatment_edges_stay_zero_despite_gradients() {
    let mut r = rng::seeded(8);
    let arch = Architecture::new(3, vec![6]);
    let mut net = Network::init(&arch, TreatmentInit::Zero, &mut r).unwrap();
    let batch = random_batch(3, 64, 9);
    let cache = net.forward_batch(batch.x.view(), &batch.t).unwrap();
    let grads = net.backward_batch(&cache, &vec![1.0; 64]).unwrap();
    let edges = net.treatment_edges();
    assert!(edges.iter().any(|&i| grads[i] != 0.0));
    let mut mask = FreezeMask::for_network(&net);
    mask.freeze(edges.iter().copied());
    let cfg = TrainConfig { epochs: 5, ..TrainConfig::default() };
    train(&mut net, &mask, &batch, None, &cfg, 1).unwrap();
    assert!(edges.iter().all(|&i| net.params()[i] == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frozen_parameters_are_bitwise_unchanged(
        seed in any::<u64>(),
        bits in proptest::collection::vec(any::<bool>(), 47),
        sgd in any::<bool>(),
    ) {
        let mut r = rng::seeded(seed);
        let arch = Architecture::new(3, vec![5, 3]);
        let mut net = Network::init(&arch, TreatmentInit::Uniform(0.1), &mut r).unwrap();
        prop_assert_eq!(net.param_count(), 47);
        let mask = FreezeMask::from_bits(bits);
        let before = net.params().to_vec();
        let cfg = TrainConfig {
            epochs: 4,
            batch_size: 7,
            patience: None,
            optimizer: if sgd { OptimizerConfig::sgd(0.05, 0.5) } else { OptimizerConfig::default() },
        };
        train(&mut net, &mask, &random_batch(3, 30, seed ^ 1), None, &cfg, seed).unwrap();
        for (i, (a, b)) in before.iter().zip(net.params()).enumerate() {
            if mask.is_frozen(i) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn training_is_deterministic(seed in any::<u64>()) {
        let arch = Architecture::new(2, vec![4]);
        let batch = random_batch(2, 40, seed);
        let validation = random_batch(2, 10, seed ^ 7);
        let cfg = TrainConfig { epochs: 6, batch_size: 8, ..TrainConfig::default() };
        let run = || {
            let mut net = Network::init(&arch, TreatmentInit::Uniform(0.01), &mut rng::seeded(seed)).unwrap();
            let mask = FreezeMask::for_network(&net);
            let log = train(&mut net, &mask, &batch, Some(&validation), &cfg, seed).unwrap();
            (net, log)
        };
        let (a, la) = run();
        let (b, lb) = run();
        prop_assert_eq!(a, b);
        prop_assert_eq!(la, lb);
    }

    #[test]
    fn zero_treatment_edges_make_output_treatment_invariant(
        seed in any::<u64>(),
        x in proptest::collection::vec(-5.0f64..5.0, 4),
    ) {
        let arch = Architecture::new(4, vec![8, 8]);
        let net = Network::init(&arch, TreatmentInit::Zero, &mut rng::seeded(seed)).unwrap();
        let a = net.forward(&x, 0.0).unwrap().0;
        let b = net.forward(&x, 1.0).unwrap().0;
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
}
