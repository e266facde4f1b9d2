use rayon::prelude::*;

use crate::dataset::{SALIENT_PERSON, SAME_PERSON_INDICES};
use crate::error::{Result, SannError};
use crate::numerics::{mean, pearson, spearman};
use crate::sann::{epochs_to_fraction, train_multi_trial, train_single_trial, SalienceTag, SannNetwork};

use super::pipeline::{prepare, salient_tags, Prepared, SALIENT_INDICES};
use super::report::{ExperimentReport, Verdict};
use super::{ExperimentConfig, ExperimentId};

/// Minimum output/reverse-salience correlation for E1.
pub const E1_MIN_CORRELATION: f64 = 0.9;
/// Minimum output correlation between salience-trained and salience-free nets (E4).
pub const E4_MIN_CORRELATION: f64 = 0.99;
/// Largest single drop tolerated in the E5 correlation sequence.
pub const E5_INVERSION_ALLOWANCE: f64 = 0.02;
/// Learning-speed criterion: error at or below this fraction of the first epoch's.
pub const ERROR_FRACTION: f64 = 0.1;
/// Largest hidden size included in the E6 trend test.
pub const E6_TREND_MAX_HIDDEN: usize = 14;

fn expect_id(cfg: &ExperimentConfig, id: ExperimentId) -> Result<()> {
    if cfg.id != id {
        return Err(SannError::Config(format!("config is for {}, not {id}", cfg.id)));
    }
    cfg.validate()
}

/// Relative reverse salience of every sample under `net`.
fn profile(net: &SannNetwork, prep: &Prepared) -> Result<Vec<f64>> {
    prep.features().iter().map(|x| net.relative_reverse_salience(x)).collect()
}

fn multi_trial_salient(cfg: &ExperimentConfig, prep: &Prepared) -> Result<SannNetwork> {
    let mut net = prep.network(cfg)?;
    let samples = salient_tags(&prep.samples, SalienceTag::new(1.0));
    train_multi_trial(&mut net, &samples, &cfg.train_params())?;
    Ok(net)
}

/// E1: correlation between network output and summed reverse salience.
pub fn run_e1_residual_correlation(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_id(cfg, ExperimentId::E1)?;
    let prep = prepare(cfg)?;
    let net = multi_trial_salient(cfg, &prep)?;
    let mut report = ExperimentReport::new(
        ExperimentId::E1,
        cfg.echo(),
        &["index", "output", "reverse_salience", "relative_reverse_salience"],
    );
    for s in &prep.samples {
        let trace = net.forward(&s.features)?;
        let rs = net.reverse_salience(&trace).total;
        let rel = net.relative_reverse_salience(&s.features)?;
        report.push_row(vec![s.source_index as f64, trace.output()[0], rs, rel])?;
    }
    let r = pearson(&report.column("output")?, &report.column("reverse_salience")?)?;
    report.summary.push(("correlation".into(), r));
    report.verdicts.push(Verdict::new(
        "output_reverse_salience_correlation",
        r >= E1_MIN_CORRELATION,
        r,
        format!(">= {E1_MIN_CORRELATION}"),
    ));
    Ok(report)
}

/// Epochs needed to reach [`ERROR_FRACTION`] of the first epoch's error, `None` if never.
fn reach(curve: &[f64]) -> Option<usize> {
    epochs_to_fraction(curve, ERROR_FRACTION)
}

/// E2: learning curves for several salience magnitudes from one initialization.
pub fn run_e2_salience_magnitude(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_id(cfg, ExperimentId::E2)?;
    let prep = prepare(cfg)?;
    let base = prep.network(cfg)?;
    let curves: Vec<Vec<f64>> = cfg
        .magnitudes
        .par_iter()
        .map(|&m| {
            let mut net = base.clone();
            let samples = salient_tags(&prep.samples, SalienceTag::new(m));
            train_multi_trial(&mut net, &samples, &cfg.train_params())
        })
        .collect::<Result<_>>()?;

    let names: Vec<String> = cfg.magnitudes.iter().map(|m| format!("error_s{m}")).collect();
    let mut columns = vec!["epoch"];
    columns.extend(names.iter().map(String::as_str));
    let mut report = ExperimentReport::new(ExperimentId::E2, cfg.echo(), &columns);
    for epoch in 0..cfg.epochs {
        let mut row = vec![(epoch + 1) as f64];
        row.extend(curves.iter().map(|c| c[epoch]));
        report.push_row(row)?;
    }

    // Verdict from the stored (rounded) curves.
    let never = cfg.epochs + 1;
    let epochs_needed: Vec<usize> = names
        .iter()
        .map(|n| Ok(reach(&report.column(n)?).unwrap_or(never)))
        .collect::<Result<_>>()?;
    for (m, e) in cfg.magnitudes.iter().zip(&epochs_needed) {
        report.summary.push((format!("epochs_to_10pct_s{m}"), *e as f64));
    }
    let zero = cfg.magnitudes.iter().position(|&m| m == 0.0).expect("validated");
    let fastest_other = cfg
        .magnitudes
        .iter()
        .zip(&epochs_needed)
        .filter(|(&m, _)| m != 0.0)
        .map(|(_, &e)| e)
        .min()
        .expect("validated: at least one nonzero magnitude");
    let zero_epochs = epochs_needed[zero];
    report.verdicts.push(Verdict::new(
        "zero_salience_fastest",
        zero_epochs < never && zero_epochs <= fastest_other,
        zero_epochs as f64,
        format!("<= {fastest_other} (fewest epochs among nonzero magnitudes)"),
    ));
    Ok(report)
}

fn check_layout(prep: &Prepared) -> Result<()> {
    let ok = SAME_PERSON_INDICES
        .iter()
        .all(|&i| prep.data.persons.get(i - 1) == Some(&SALIENT_PERSON));
    if !ok {
        return Err(SannError::Config(
            "dataset does not place images 2, 3, 9, 10, 11 on one person".into(),
        ));
    }
    Ok(())
}

/// 1-based descending ranks (1 = largest); ties broken by position.
fn descending_ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// E3: relative reverse salience of every image after multi-trial salient training.
pub fn run_e3_multi_trial_profile(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_id(cfg, ExperimentId::E3)?;
    let prep = prepare(cfg)?;
    check_layout(&prep)?;
    let net = multi_trial_salient(cfg, &prep)?;
    let values = profile(&net, &prep)?;
    let ranks = descending_ranks(&values);
    let mut report = ExperimentReport::new(
        ExperimentId::E3,
        cfg.echo(),
        &["index", "person", "salience", "relative_reverse_salience", "rank"],
    );
    for (i, s) in prep.samples.iter().enumerate() {
        let salience = if SALIENT_INDICES.contains(&s.source_index) { 1.0 } else { 0.0 };
        report.push_row(vec![
            s.source_index as f64,
            prep.data.persons[i] as f64,
            salience,
            values[i],
            ranks[i] as f64,
        ])?;
    }
    report.verdicts.extend(profile_verdicts(&report)?);
    Ok(report)
}

/// E3 verdicts, computed from the report rows only.
fn profile_verdicts(report: &ExperimentReport) -> Result<Vec<Verdict>> {
    let index = report.column("index")?;
    let salience = report.column("salience")?;
    let value = report.column("relative_reverse_salience")?;
    let rank = report.column("rank")?;

    let worst_salient_rank = index
        .iter()
        .zip(&rank)
        .filter(|(i, _)| SALIENT_INDICES.contains(&(**i as usize)))
        .map(|(_, &r)| r)
        .fold(0.0, f64::max);

    let similar: Vec<usize> = SAME_PERSON_INDICES
        .iter()
        .copied()
        .filter(|i| !SALIENT_INDICES.contains(i))
        .collect();
    let rest: Vec<f64> = index
        .iter()
        .zip(&salience)
        .zip(&value)
        .filter(|((i, s), _)| **s == 0.0 && !similar.contains(&(**i as usize)))
        .map(|(_, &v)| v)
        .collect();
    let rest_mean = mean(&rest);
    let similar_min = index
        .iter()
        .zip(&value)
        .filter(|(i, _)| similar.contains(&(**i as usize)))
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let margin = similar_min - rest_mean;

    Ok(vec![
        Verdict::new(
            "salient_images_in_top5",
            (1.0..=5.0).contains(&worst_salient_rank),
            worst_salient_rank,
            "worst rank of images 9, 10, 11 <= 5",
        ),
        Verdict::new(
            "similar_images_above_untagged_mean",
            margin > 0.0,
            margin,
            "min(images 2, 3) - mean(other untagged) > 0",
        ),
    ])
}

/// E4: output correlation between salience-free and salience-trained networks.
pub fn run_e4_output_independence(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_id(cfg, ExperimentId::E4)?;
    let prep = prepare(cfg)?;
    let base = prep.network(cfg)?;

    let mut plain = base.clone();
    train_multi_trial(&mut plain, &prep.samples, &cfg.train_params())?;
    let mut salient = base;
    let tagged = salient_tags(&prep.samples, SalienceTag::new(1.0));
    train_multi_trial(&mut salient, &tagged, &cfg.train_params())?;

    let mut report = ExperimentReport::new(
        ExperimentId::E4,
        cfg.echo(),
        &["index", "output_plain", "output_salient"],
    );
    for s in &prep.samples {
        report.push_row(vec![
            s.source_index as f64,
            plain.predict(&s.features)?[0],
            salient.predict(&s.features)?[0],
        ])?;
    }
    let r = pearson(&report.column("output_plain")?, &report.column("output_salient")?)?;
    report.summary.push(("correlation".into(), r));
    report.verdicts.push(Verdict::new(
        "output_independence",
        r >= E4_MIN_CORRELATION,
        r,
        format!(">= {E4_MIN_CORRELATION}"),
    ));
    Ok(report)
}

/// Passes when `correlations` never decreases, except for at most one drop of at most
/// [`E5_INVERSION_ALLOWANCE`]. Returns `(passed, largest drop, number of drops)`.
pub fn amplification_verdict(correlations: &[f64]) -> (bool, f64, usize) {
    let drops: Vec<f64> = correlations
        .windows(2)
        .filter(|w| w[1] < w[0])
        .map(|w| w[0] - w[1])
        .collect();
    let largest = drops.iter().copied().fold(0.0, f64::max);
    let passed = drops.is_empty() || (drops.len() == 1 && largest <= E5_INVERSION_ALLOWANCE);
    (passed, largest, drops.len())
}

/// E5: single-trial profiles across amplification factors against the multi-trial profile.
pub fn run_e5_single_trial_amplification(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_id(cfg, ExperimentId::E5)?;
    let prep = prepare(cfg)?;
    let multi = profile(&multi_trial_salient(cfg, &prep)?, &prep)?;
    let multi_max = multi.iter().fold(0.0, |m: f64, v| m.max(v.abs()));

    let base = prep.network(cfg)?;
    let tagged = salient_tags(&prep.samples, SalienceTag::new(1.0));

    let rows: Vec<(u32, f64, f64)> = cfg
        .amplifications
        .par_iter()
        .map(|&amp| {
            let mut net = base.clone();
            train_single_trial(&mut net, &tagged, &cfg.train_params(), amp)?;
            let single = profile(&net, &prep)?;
            let r = pearson(&single, &multi)?;
            let max = single.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            Ok((amp, r, max))
        })
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new(
        ExperimentId::E5,
        cfg.echo(),
        &["amplification", "correlation", "max_abs_single", "max_abs_multi"],
    );
    for (amp, r, max) in rows {
        report.push_row(vec![f64::from(amp), r, max, multi_max])?;
    }
    let corr = report.column("correlation")?;
    let (passed, largest, drops) = amplification_verdict(&corr);
    report.summary.push(("drops".into(), drops as f64));
    report.verdicts.push(Verdict::new(
        "correlation_non_decreasing",
        passed,
        largest,
        format!("no drop, or a single drop <= {E5_INVERSION_ALLOWANCE}"),
    ));
    let singles = report.column("max_abs_single")?;
    let multis = report.column("max_abs_multi")?;
    let worst_ratio = singles
        .iter()
        .zip(&multis)
        .map(|(s, m)| s / m)
        .fold(0.0, f64::max);
    report.verdicts.push(Verdict::new(
        "single_trial_smaller_magnitude",
        worst_ratio < 1.0,
        worst_ratio,
        "max |single| / max |multi| < 1 for every amplification",
    ));
    Ok(report)
}

/// E6: epochs to reach 10% of the initial error across hidden-layer sizes.
pub fn run_e6_hidden_sweep(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    expect_id(cfg, ExperimentId::E6)?;
    let prep = prepare(cfg)?;
    let tag = SalienceTag::amplified(1.0, cfg.sweep_amplification)?;
    let tagged = salient_tags(&prep.samples, tag);
    let rows: Vec<Vec<f64>> = cfg
        .hidden_sizes
        .par_iter()
        .enumerate()
        .map(|(k, &h)| {
            let mut net = prep.sweep_network(cfg, h, k)?;
            let curve = train_multi_trial(&mut net, &tagged, &cfg.train_params())?;
            let (iters, censored) = match reach(&curve) {
                Some(e) => (e, 0.0),
                None => (cfg.epochs, 1.0),
            };
            Ok(vec![h as f64, iters as f64, censored, curve[0], curve[curve.len() - 1]])
        })
        .collect::<Result<_>>()?;
    let mut report = ExperimentReport::new(
        ExperimentId::E6,
        cfg.echo(),
        &["hidden", "iterations", "censored", "initial_error", "final_error"],
    );
    for row in rows {
        report.push_row(row)?;
    }
    let hidden = report.column("hidden")?;
    let iters = report.column("iterations")?;
    let (h, it): (Vec<f64>, Vec<f64>) = hidden
        .iter()
        .zip(&iters)
        .filter(|(h, _)| **h <= E6_TREND_MAX_HIDDEN as f64)
        .map(|(h, i)| (*h, *i))
        .unzip();
    let rho = spearman(&h, &it).unwrap_or(f64::NAN);
    if rho.is_finite() {
        report.summary.push(("spearman".into(), rho));
    }
    report.verdicts.push(Verdict::new(
        "iterations_decrease_with_size",
        rho < 0.0,
        if rho.is_finite() { rho } else { 0.0 },
        format!("spearman(hidden, iterations) over sizes <= {E6_TREND_MAX_HIDDEN} < 0"),
    ));
    Ok(report)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.id {
        ExperimentId::E1 => run_e1_residual_correlation(cfg),
        ExperimentId::E2 => run_e2_salience_magnitude(cfg),
        ExperimentId::E3 => run_e3_multi_trial_profile(cfg),
        ExperimentId::E4 => run_e4_output_independence(cfg),
        ExperimentId::E5 => run_e5_single_trial_amplification(cfg),
        ExperimentId::E6 => run_e6_hidden_sweep(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplification_rule() {
        assert_eq!(amplification_verdict(&[0.1, 0.2, 0.3]), (true, 0.0, 0));
        let (ok, drop, n) = amplification_verdict(&[0.1, 0.3, 0.29, 0.4]);
        assert!(ok && n == 1 && (drop - 0.01).abs() < 1e-12);
        assert!(!amplification_verdict(&[0.1, 0.3, 0.25, 0.4]).0);
        assert!(!amplification_verdict(&[0.3, 0.29, 0.4, 0.39]).0);
    }

    #[test]
    fn ranks_descend() {
        assert_eq!(descending_ranks(&[0.1, 0.5, -1.0, 0.5]), vec![3, 1, 4, 2]);
    }

    #[test]
    fn wrong_id_is_rejected() {
        let cfg = ExperimentConfig::new(ExperimentId::E2);
        assert!(matches!(run_e1_residual_correlation(&cfg), Err(SannError::Config(_))));
    }
}
