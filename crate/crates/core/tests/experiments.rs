use sann::experiments::{
    prepare, run_e1_residual_correlation, run_e2_salience_magnitude, run_e3_multi_trial_profile,
    run_e4_output_independence, run_e5_single_trial_amplification, run_e6_hidden_sweep, run_experiment,
    salient_tags, ExperimentConfig, ExperimentId, ExperimentReport,
};
use sann::numerics::pearson;
use sann::sann::{train_multi_trial, SalienceMode, SalienceTag};
use sann::SannError;

fn small(id: ExperimentId) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(id);
    cfg.n_images = 24;
    cfg.nmf.rank = 8;
    cfg.nmf.max_iters = 40;
    cfg.epochs = 10;
    cfg.lr = 0.1;
    cfg.mode = SalienceMode::LiteralEq2;
    cfg
}

#[test]
fn report_shapes() {
    let r = run_e1_residual_correlation(&small(ExperimentId::E1)).unwrap();
    assert_eq!(r.columns[..3], ["index", "output", "reverse_salience"]);
    assert_eq!(r.rows.len(), 24);

    let mut cfg = small(ExperimentId::E2);
    cfg.magnitudes = vec![0.0, 1.0];
    let r = run_e2_salience_magnitude(&cfg).unwrap();
    assert_eq!(r.columns, ["epoch", "error_s0", "error_s1"]);
    assert_eq!(r.rows.len(), 10);

    let r = run_e3_multi_trial_profile(&small(ExperimentId::E3)).unwrap();
    assert_eq!(r.rows.len(), 24);
    assert_eq!(r.verdicts.len(), 2);

    let mut cfg = small(ExperimentId::E5);
    cfg.mode = SalienceMode::Fig7;
    let r = run_e5_single_trial_amplification(&cfg).unwrap();
    assert_eq!(r.column("amplification").unwrap(), [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);

    let mut cfg = small(ExperimentId::E6);
    cfg.epochs = 4;
    let r = run_e6_hidden_sweep(&cfg).unwrap();
    assert_eq!(r.column("hidden").unwrap(), (2..=18).map(f64::from).collect::<Vec<_>>());
    for (it, c) in r.column("iterations").unwrap().iter().zip(r.column("censored").unwrap()) {
        assert!(c == 0.0 || *it == 4.0, "censored rows report the epoch cap");
    }
}

#[test]
fn out_of_range_sweeps_are_config_errors() {
    let mut cfg = small(ExperimentId::E5);
    cfg.amplifications = vec![0, 1, 2];
    assert!(matches!(run_experiment(&cfg), Err(SannError::Config(_))));
    let mut cfg = small(ExperimentId::E6);
    cfg.hidden_sizes = vec![1, 2, 3];
    assert!(matches!(run_experiment(&cfg), Err(SannError::Config(_))));
    let mut cfg = small(ExperimentId::E2);
    cfg.magnitudes = vec![1.0, 2.0];
    assert!(matches!(run_experiment(&cfg), Err(SannError::Config(_))));
}

#[test]
fn csv_round_trips_and_reruns_match() {
    for id in ExperimentId::ALL {
        let mut cfg = small(id);
        cfg.hidden_sizes = vec![2, 5, 9];
        cfg.amplifications = vec![1, 3];
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv(), "{id}");
        let (cols, rows) = ExperimentReport::parse_csv(&a.to_csv()).unwrap();
        assert_eq!(cols, a.columns);
        assert_eq!(rows, a.rows);
    }
}

/// Verdicts are recomputable from the CSV alone.
#[test]
fn verdicts_follow_from_the_csv() {
    let r = run_e4_output_independence(&small(ExperimentId::E4)).unwrap();
    let (_, rows) = ExperimentReport::parse_csv(&r.to_csv()).unwrap();
    let a: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let b: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let corr = pearson(&a, &b).unwrap();
    let v = r.verdict("output_independence").unwrap();
    assert_eq!(v.measured, corr);
    assert_eq!(v.passed, corr >= 0.99);
}

#[test]
fn output_independence_control_is_exactly_one() {
    let mut cfg = small(ExperimentId::E4);
    cfg.salience_enabled = false;
    let r = run_e4_output_independence(&cfg).unwrap();
    assert_eq!(r.summary_value("correlation"), Some(1.0));
}

/// Salience first touches the network at image 9 of epoch 1.
#[test]
fn salience_curves_diverge_only_after_first_salient_sample() {
    let cfg = small(ExperimentId::E2);
    let prep = prepare(&cfg).unwrap();
    let base = prep.network(&cfg).unwrap();
    let params = sann::sann::TrainParams {
        epochs: 1,
        ..cfg.train_params()
    };
    let run = |n: usize, s: f64| {
        let samples = salient_tags(&prep.samples[..n], SalienceTag::new(s));
        let mut net = base.clone();
        train_multi_trial(&mut net, &samples, &params).unwrap();
        net.to_text()
    };
    assert_eq!(run(8, 0.0), run(8, 1.0));
    assert_ne!(run(9, 0.0), run(9, 1.0));

    let mut cfg = cfg;
    cfg.magnitudes = vec![0.0, 1.0];
    let r = run_e2_salience_magnitude(&cfg).unwrap();
    let (a, b) = (r.column("error_s0").unwrap(), r.column("error_s1").unwrap());
    assert_ne!(a, b);
}

/// With salience disabled every threshold stays 0, so the reverse salience of a
/// sample is `-Σ A·V`. Recompute the whole correlation with plain loops.
#[test]
fn residual_correlation_matches_brute_force() {
    let mut cfg = small(ExperimentId::E1);
    cfg.salience_enabled = false;
    let report = run_e1_residual_correlation(&cfg).unwrap();

    let prep = prepare(&cfg).unwrap();
    let mut net = prep.network(&cfg).unwrap();
    train_multi_trial(&mut net, &prep.samples, &cfg.train_params()).unwrap();
    assert!(net.thresholds().iter().all(|&t| t == 0.0));

    let (wi, wo) = (net.w_ih(), net.w_ho());
    let mut outs = Vec::new();
    let mut rs = Vec::new();
    for s in &prep.samples {
        let mut total = 0.0;
        let mut hidden = Vec::new();
        for j in 0..net.n_hidden() {
            let v: f64 = s.features.iter().enumerate().map(|(i, x)| x * wi[(i, j)]).sum();
            let a = v.tanh();
            total -= a * v;
            hidden.push(a);
        }
        let v: f64 = hidden.iter().enumerate().map(|(j, h)| h * wo[(j, 0)]).sum();
        let o = v.tanh();
        total -= o * v;
        outs.push(o);
        rs.push(total);
    }
    let n = outs.len() as f64;
    let (mo, mr) = (outs.iter().sum::<f64>() / n, rs.iter().sum::<f64>() / n);
    let cov: f64 = outs.iter().zip(&rs).map(|(o, r)| (o - mo) * (r - mr)).sum();
    let so: f64 = outs.iter().map(|o| (o - mo).powi(2)).sum::<f64>().sqrt();
    let sr: f64 = rs.iter().map(|r| (r - mr).powi(2)).sum::<f64>().sqrt();
    let brute = cov / (so * sr);

    let reported = report.summary_value("correlation").unwrap();
    assert!((reported - brute).abs() < 1e-8, "{reported} vs {brute}");
    for (row, (o, r)) in report.rows.iter().zip(outs.iter().zip(&rs)) {
        assert!((row[1] - o).abs() <= 1e-9 * o.abs().max(1e-12));
        assert!((row[2] - r).abs() <= 1e-9 * r.abs().max(1e-12));
    }
}

#[test]
fn e3_marks_the_salient_images() {
    let r = run_e3_multi_trial_profile(&small(ExperimentId::E3)).unwrap();
    let index = r.column("index").unwrap();
    let sal = r.column("salience").unwrap();
    for (i, s) in index.iter().zip(&sal) {
        assert_eq!(*s == 1.0, [9.0, 10.0, 11.0].contains(i));
    }
    let mut ranks = r.column("rank").unwrap();
    ranks.sort_by(f64::total_cmp);
    assert_eq!(ranks, (1..=24).map(f64::from).collect::<Vec<_>>());
}
