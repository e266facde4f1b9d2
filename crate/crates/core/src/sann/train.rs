//! Multi-trial and single-trial training loops.

use crate::error::{Result, SannError};

use super::network::SannNetwork;
use super::salience::{SalienceMode, SalienceTag};

/// One supervised example with its salience tag.
pub trait Example {
    fn features(&self) -> &[f64];
    fn target(&self) -> &[f64];
    fn tag(&self) -> SalienceTag;
}

/// Owned example, handy for tests and small programs.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub features: Vec<f64>,
    pub target: Vec<f64>,
    pub tag: SalienceTag,
}

impl Example for LabeledExample {
    fn features(&self) -> &[f64] {
        &self.features
    }

    fn target(&self) -> &[f64] {
        &self.target
    }

    fn tag(&self) -> SalienceTag {
        self.tag
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub epochs: usize,
    pub lr: f64,
    pub momentum: f64,
    pub mode: SalienceMode,
    /// When false, tags are ignored and the network trains as a plain MLP.
    pub salience_enabled: bool,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr: 0.5,
            momentum: 0.1,
            mode: SalienceMode::Fig7,
            salience_enabled: true,
        }
    }
}

impl TrainParams {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(SannError::Config("epochs must be >= 1".into()));
        }
        if !(self.lr > 0.0) {
            return Err(SannError::Config(format!("learning rate must be > 0, got {}", self.lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(SannError::Config(format!("momentum must be in [0, 1), got {}", self.momentum)));
        }
        Ok(())
    }
}

/// Trains with salience applied alongside backprop every epoch.
///
/// Per epoch and per example, in order: a backprop step, then (if the example is
/// salient) a fresh forward pass and a threshold update with `s_eff = tag.effective()`.
/// Returns the mean pre-update error of each epoch.
pub fn train_multi_trial<E: Example>(net: &mut SannNetwork, samples: &[E], params: &TrainParams) -> Result<Vec<f64>> {
    params.validate()?;
    if samples.is_empty() {
        return Err(SannError::Config("cannot train on an empty dataset".into()));
    }
    let mut curve = Vec::with_capacity(params.epochs);
    for epoch in 0..params.epochs {
        let mut total = 0.0;
        for sample in samples {
            total += net.backprop_step(sample.features(), sample.target(), params.lr, params.momentum)?;
            let tag = sample.tag();
            if params.salience_enabled && tag.is_salient() {
                let trace = net.forward(sample.features())?;
                net.apply_salience_with(&trace, tag.effective(), params.mode)?;
            }
        }
        let mean = total / samples.len() as f64;
        if !mean.is_finite() {
            return Err(SannError::Divergence(format!("non-finite error at epoch {epoch}")));
        }
        curve.push(mean);
    }
    Ok(curve)
}

/// Salience-free training followed by exactly one salience pass.
///
/// Phase one is [`train_multi_trial`] with salience switched off. Phase two visits each
/// salient example once and applies `s_eff = amplification × tag.s` without touching
/// the weights. Returns the phase-one learning curve.
pub fn train_single_trial<E: Example>(
    net: &mut SannNetwork,
    samples: &[E],
    params: &TrainParams,
    amplification: u32,
) -> Result<Vec<f64>> {
    if amplification == 0 {
        return Err(SannError::Config("amplification must be >= 1".into()));
    }
    let phase_one = TrainParams {
        salience_enabled: false,
        ..*params
    };
    let curve = train_multi_trial(net, samples, &phase_one)?;
    if params.salience_enabled {
        for sample in samples.iter().filter(|s| s.tag().is_salient()) {
            let trace = net.forward(sample.features())?;
            net.apply_salience_with(&trace, f64::from(amplification) * sample.tag().s, params.mode)?;
        }
    }
    Ok(curve)
}

/// First epoch (1-based) whose mean error is at most `fraction` of the first epoch's,
/// or `None` if the curve never gets there.
pub fn epochs_to_fraction(curve: &[f64], fraction: f64) -> Option<usize> {
    let first = *curve.first()?;
    curve.iter().position(|&e| e <= fraction * first).map(|i| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;
    use crate::sann::init_network;

    fn toy_samples(salient: &[usize]) -> Vec<LabeledExample> {
        let xs = [
            [0.1, 0.9, 0.2],
            [0.8, 0.2, 0.4],
            [0.5, 0.5, 0.9],
            [0.3, 0.1, 0.7],
            [0.9, 0.8, 0.1],
        ];
        xs.iter()
            .enumerate()
            .map(|(i, x)| LabeledExample {
                features: x.to_vec(),
                target: vec![x.iter().sum::<f64>() / 3.0],
                tag: if salient.contains(&i) {
                    SalienceTag::new(1.0)
                } else {
                    SalienceTag::NONE
                },
            })
            .collect()
    }

    #[test]
    fn curve_length_matches_epochs() {
        let mut net = init_network(3, 4, 1, 1.0, 0.2, &mut Rng::new(1)).unwrap();
        let params = TrainParams { epochs: 17, ..Default::default() };
        assert_eq!(train_multi_trial(&mut net, &toy_samples(&[0]), &params).unwrap().len(), 17);
    }

    #[test]
    fn untagged_training_keeps_thresholds_zero() {
        let mut net = init_network(3, 4, 1, 1.0, 0.2, &mut Rng::new(1)).unwrap();
        train_multi_trial(&mut net, &toy_samples(&[]), &TrainParams::default()).unwrap();
        assert!(net.thresholds().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn learnable_toy_set_converges() {
        let mut net = init_network(3, 4, 1, 1.0, 0.2, &mut Rng::new(2)).unwrap();
        let curve = train_multi_trial(&mut net, &toy_samples(&[]), &TrainParams::default()).unwrap();
        assert!(curve[199] < 0.1 * curve[0], "{} vs {}", curve[199], curve[0]);
    }

    #[test]
    fn empty_dataset_and_zero_epochs() {
        let mut net = init_network(3, 4, 1, 1.0, 0.2, &mut Rng::new(1)).unwrap();
        let empty: Vec<LabeledExample> = vec![];
        assert!(matches!(
            train_multi_trial(&mut net, &empty, &TrainParams::default()),
            Err(SannError::Config(_))
        ));
        let params = TrainParams { epochs: 0, ..Default::default() };
        assert!(matches!(
            train_multi_trial(&mut net, &toy_samples(&[]), &params),
            Err(SannError::Config(_))
        ));
    }

    #[test]
    fn single_trial_without_salient_examples_equals_phase_one() {
        let base = init_network(3, 4, 1, 1.0, 0.2, &mut Rng::new(5)).unwrap();
        let samples = toy_samples(&[]);
        let mut a = base.clone();
        train_single_trial(&mut a, &samples, &TrainParams::default(), 3).unwrap();
        let mut b = base;
        let params = TrainParams { salience_enabled: false, ..Default::default() };
        train_multi_trial(&mut b, &samples, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_trial_rejects_zero_amplification() {
        let mut net = init_network(3, 4, 1, 1.0, 0.2, &mut Rng::new(5)).unwrap();
        assert!(matches!(
            train_single_trial(&mut net, &toy_samples(&[1]), &TrainParams::default(), 0),
            Err(SannError::Config(_))
        ));
    }

    #[test]
    fn larger_amplification_moves_thresholds_further() {
        let base = init_network(3, 4, 1, 1.0, 0.2, &mut Rng::new(6)).unwrap();
        let samples = toy_samples(&[2]);
        let mut low = base.clone();
        train_single_trial(&mut low, &samples, &TrainParams::default(), 2).unwrap();
        let mut high = base;
        train_single_trial(&mut high, &samples, &TrainParams::default(), 5).unwrap();
        for (l, h) in low.thresholds().iter().zip(high.thresholds()) {
            assert!(h.abs() >= l.abs());
        }
        let sum = |n: &SannNetwork| n.thresholds().iter().map(|t| t.abs()).sum::<f64>();
        assert!(sum(&high) > sum(&low));
    }

    #[test]
    fn epochs_to_fraction_basics() {
        assert_eq!(epochs_to_fraction(&[1.0, 0.5, 0.09, 0.01], 0.1), Some(3));
        assert_eq!(epochs_to_fraction(&[1.0, 0.5], 0.1), None);
        assert_eq!(epochs_to_fraction(&[], 0.1), None);
    }
}
