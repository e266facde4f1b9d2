use proptest::prelude::*;

use sann::numerics::{Matrix, Rng};
use sann::sann::{
    init_network, train_multi_trial, train_single_trial, LabeledExample, SalienceMode, SalienceTag, SannNetwork,
    TrainParams,
};
use sann::SannError;

fn net_from(seed: u64, n_in: usize, n_hidden: usize, n_out: usize) -> SannNetwork {
    let mut rng = Rng::new(seed);
    let w_ih = Matrix::from_vec(n_in, n_hidden, rng.uniform(-1.5, 1.5, n_in * n_hidden).unwrap()).unwrap();
    let w_ho = Matrix::from_vec(n_hidden, n_out, rng.uniform(-1.5, 1.5, n_hidden * n_out).unwrap()).unwrap();
    let t = rng.uniform(-0.9, 0.9, n_hidden + n_out).unwrap();
    SannNetwork::from_parts(w_ih, w_ho, t, 1.0, 0.2).unwrap()
}

fn loss(net: &SannNetwork, x: &[f64], t: &[f64]) -> f64 {
    let o = net.predict(x).unwrap();
    o.iter().zip(t).map(|(o, t)| 0.5 * (t - o).powi(2)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradients_match_central_differences(
        seed in any::<u64>(),
        big in any::<bool>(),
        x in prop::collection::vec(-1.0f64..1.0, 4),
        t in prop::collection::vec(-0.9f64..0.9, 2),
    ) {
        let (n_in, n_hidden, n_out) = if big { (4, 3, 2) } else { (3, 2, 1) };
        let net = net_from(seed, n_in, n_hidden, n_out);
        let (x, t) = (&x[..n_in], &t[..n_out]);
        let g = net.gradients(x, t).unwrap();
        let h = 1e-5;
        for i in 0..n_in {
            for j in 0..n_hidden {
                let w = net.w_ih()[(i, j)];
                let (mut p, mut m) = (net.clone(), net.clone());
                p.set_weight_ih(i, j, w + h);
                m.set_weight_ih(i, j, w - h);
                let fd = (loss(&p, x, t) - loss(&m, x, t)) / (2.0 * h);
                prop_assert!((fd - g.ih[(i, j)]).abs() < 1e-6, "ih[{i},{j}] {fd} vs {}", g.ih[(i, j)]);
            }
        }
        for j in 0..n_hidden {
            for k in 0..n_out {
                let w = net.w_ho()[(j, k)];
                let (mut p, mut m) = (net.clone(), net.clone());
                p.set_weight_ho(j, k, w + h);
                m.set_weight_ho(j, k, w - h);
                let fd = (loss(&p, x, t) - loss(&m, x, t)) / (2.0 * h);
                prop_assert!((fd - g.ho[(j, k)]).abs() < 1e-6, "ho[{j},{k}] {fd} vs {}", g.ho[(j, k)]);
            }
        }
    }

    #[test]
    fn thresholds_stay_within_limit(
        seed in any::<u64>(),
        literal in any::<bool>(),
        steps in prop::collection::vec((prop::collection::vec(-3.0f64..3.0, 3), -8.0f64..8.0), 1..60),
    ) {
        let mode = if literal { SalienceMode::LiteralEq2 } else { SalienceMode::Fig7 };
        let mut net = net_from(seed, 3, 4, 2);
        for (x, s) in steps {
            let trace = net.forward(&x).unwrap();
            net.apply_salience_with(&trace, s, mode).unwrap();
            prop_assert!(net.thresholds().iter().all(|t| t.abs() <= net.t_lim()));
        }
    }

    #[test]
    fn positive_salience_potentiates_hidden_nodes(
        seed in any::<u64>(),
        x in prop::collection::vec(-2.0f64..2.0, 3),
        s in 0.01f64..6.0,
    ) {
        let mut net = net_from(seed, 3, 5, 1);
        let before = net.forward(&x).unwrap();
        net.apply_salience(&before, s).unwrap();
        let after = net.forward(&x).unwrap();
        for (a, b) in before.hidden().iter().zip(after.hidden()) {
            if *a > 0.0 {
                prop_assert!(b >= a, "{a} -> {b}");
            } else if *a < 0.0 {
                prop_assert!(b <= a, "{a} -> {b}");
            }
        }
    }

    #[test]
    fn zero_salience_is_a_no_op(seed in any::<u64>(), x in prop::collection::vec(-2.0f64..2.0, 3)) {
        for mode in SalienceMode::ALL {
            let mut net = net_from(seed, 3, 4, 1);
            let before = net.clone();
            let trace = net.forward(&x).unwrap();
            net.apply_salience_with(&trace, 0.0, mode).unwrap();
            prop_assert_eq!(net.to_text(), before.to_text());
        }
    }
}

#[test]
fn stale_trace_is_rejected() {
    let mut net = net_from(1, 3, 2, 1);
    let trace = net.forward(&[0.1, 0.2, 0.3]).unwrap();
    net.backprop_step(&[0.1, 0.2, 0.3], &[0.5], 0.5, 0.1).unwrap();
    assert!(matches!(net.apply_salience(&trace, 1.0), Err(SannError::StaleTrace { .. })));
}

#[test]
fn target_equal_to_output_leaves_weights_alone() {
    let mut net = net_from(2, 3, 2, 1);
    let x = [0.4, -0.2, 0.9];
    let out = net.predict(&x).unwrap();
    let before = (net.w_ih().clone(), net.w_ho().clone());
    let err = net.backprop_step(&x, &out, 0.5, 0.1).unwrap();
    assert_eq!(err, 0.0);
    assert_eq!((net.w_ih().clone(), net.w_ho().clone()), before);
}

fn learnable(rng: &mut Rng) -> Vec<LabeledExample> {
    (0..5)
        .map(|i| {
            let x = rng.uniform(0.0, 1.0, 4).unwrap();
            LabeledExample {
                target: vec![0.6 * (x[0] - x[1]) + 0.1 * i as f64 - 0.2],
                features: x,
                tag: SalienceTag::NONE,
            }
        })
        .collect()
}

#[test]
fn training_reduces_error_by_ninety_percent() {
    let mut rng = Rng::new(5);
    let data = learnable(&mut rng);
    let mut net = init_network(4, 3, 1, 1.0, 0.2, &mut rng).unwrap();
    let curve = train_multi_trial(&mut net, &data, &TrainParams::default()).unwrap();
    assert_eq!(curve.len(), 200);
    assert!(curve[199] < 0.1 * curve[0], "{} vs {}", curve[199], curve[0]);
}

#[test]
fn single_trial_without_salient_samples_equals_phase_one() {
    let mut rng = Rng::new(6);
    let data = learnable(&mut rng);
    let init = init_network(4, 3, 1, 1.0, 0.2, &mut rng).unwrap();
    let params = TrainParams {
        epochs: 30,
        ..Default::default()
    };
    let mut single = init.clone();
    train_single_trial(&mut single, &data, &params, 4).unwrap();
    let mut plain = init;
    train_multi_trial(
        &mut plain,
        &data,
        &TrainParams {
            salience_enabled: false,
            ..params
        },
    )
    .unwrap();
    assert_eq!(single.to_text(), plain.to_text());
}

#[test]
fn stronger_amplification_moves_thresholds_further() {
    let mut rng = Rng::new(9);
    let mut data = learnable(&mut rng);
    data[2].tag = SalienceTag::new(1.0);
    let init = init_network(4, 3, 1, 1.0, 0.2, &mut rng).unwrap();
    let params = TrainParams {
        epochs: 20,
        ..Default::default()
    };
    let run = |amp| {
        let mut net = init.clone();
        train_single_trial(&mut net, &data, &params, amp).unwrap();
        net
    };
    let (two, five) = (run(2), run(5));
    let active = two.forward(&data[2].features).unwrap();
    for (i, a) in active.activations.iter().enumerate() {
        if *a != 0.0 {
            assert!(five.thresholds()[i].abs() > two.thresholds()[i].abs(), "node {i}");
        }
    }
}

#[test]
fn amplification_zero_is_rejected() {
    let mut rng = Rng::new(3);
    let data = learnable(&mut rng);
    let mut net = init_network(4, 3, 1, 1.0, 0.2, &mut rng).unwrap();
    assert!(matches!(
        train_single_trial(&mut net, &data, &TrainParams::default(), 0),
        Err(SannError::Config(_))
    ));
    assert!(SalienceTag::amplified(1.0, 0).is_err());
}

#[test]
fn relative_reverse_salience_of_control_is_zero() {
    let net = net_from(4, 6, 3, 1);
    assert_eq!(net.relative_reverse_salience(&[0.5; 6]).unwrap(), 0.0);
    let zero = SannNetwork::from_parts(Matrix::zeros(6, 3), Matrix::zeros(3, 1), vec![0.0; 4], 1.0, 0.2).unwrap();
    for x in [[0.0; 6], [1.0; 6], [0.3, 0.9, 0.1, 0.0, 0.7, 0.2]] {
        assert_eq!(zero.relative_reverse_salience(&x).unwrap(), 0.0);
    }
}
