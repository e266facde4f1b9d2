//! Seeded runners for the six validation studies.
//!
//! | id | study                                   | images |
//! |----|-----------------------------------------|--------|
//! | E1 | output vs. reverse salience correlation | 100    |
//! | E2 | learning curves per salience magnitude  | 100    |
//! | E3 | multi-trial relative salience profile   | 200    |
//! | E4 | output independence from salience       | 200    |
//! | E5 | single-trial amplification sweep        | 200    |
//! | E6 | hidden-layer size sweep                 | 100    |
//!
//! Every runner is a pure function of its [`ExperimentConfig`]: the synthetic data,
//! NMF basis, network initialization and sweep points all derive from `seed`.

mod pipeline;
mod report;
mod runners;

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SannError};
use crate::nmf::NmfConfig;
use crate::sann::{SalienceMode, TrainParams};

pub use pipeline::{prepare, salient_tags, Prepared, SALIENT_INDICES};
// The CLI shares these so `factorize` + `train` on a synthetic set see the same
// data and basis as the experiments.
pub(crate) use pipeline::{STREAM_DATA, STREAM_ENCODE, STREAM_NET, STREAM_NMF};
pub use report::{format_cell, round_sig, ExperimentReport, Verdict, SIGNIFICANT_DIGITS};
pub use runners::{
    amplification_verdict, run_e1_residual_correlation, run_e2_salience_magnitude, run_e3_multi_trial_profile,
    run_e4_output_independence, run_e5_single_trial_amplification, run_e6_hidden_sweep, run_experiment,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::E1,
        ExperimentId::E2,
        ExperimentId::E3,
        ExperimentId::E4,
        ExperimentId::E5,
        ExperimentId::E6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::E1 => "E1",
            ExperimentId::E2 => "E2",
            ExperimentId::E3 => "E3",
            ExperimentId::E4 => "E4",
            ExperimentId::E5 => "E5",
            ExperimentId::E6 => "E6",
        }
    }

    /// Dataset size each study runs on.
    pub fn default_images(self) -> usize {
        match self {
            ExperimentId::E1 | ExperimentId::E2 | ExperimentId::E6 => 100,
            ExperimentId::E3 | ExperimentId::E4 | ExperimentId::E5 => 200,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = SannError;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| SannError::Config(format!("unknown experiment {s:?}; valid ids are E1..E6")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: ExperimentId,
    pub n_images: usize,
    pub n_persons: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub epochs: usize,
    pub n_hidden: usize,
    pub b: f64,
    pub t_lim: f64,
    pub lr: f64,
    pub momentum: f64,
    pub mode: SalienceMode,
    /// When false every run trains as a plain MLP (control runs).
    pub salience_enabled: bool,
    /// Salience magnitudes compared by E2.
    pub magnitudes: Vec<f64>,
    /// Single-trial amplification factors swept by E5.
    pub amplifications: Vec<u32>,
    /// Multi-trial amplification used by E6.
    pub sweep_amplification: u32,
    /// Hidden-layer sizes swept by E6.
    pub hidden_sizes: Vec<usize>,
    /// Rank is also the network input width.
    pub nmf: NmfConfig,
}

impl ExperimentConfig {
    pub fn new(id: ExperimentId) -> Self {
        Self {
            id,
            n_images: id.default_images(),
            n_persons: 40,
            noise_sigma: 0.05,
            seed: 1,
            epochs: 200,
            n_hidden: 10,
            b: 0.2,
            t_lim: 1.0,
            lr: 0.5,
            momentum: 0.1,
            mode: SalienceMode::Fig7,
            salience_enabled: true,
            magnitudes: vec![0.0, 0.5, 1.0, 2.0],
            amplifications: (1..=6).collect(),
            sweep_amplification: 2,
            hidden_sizes: (2..=18).collect(),
            nmf: NmfConfig::default(),
        }
    }

    pub fn n_in(&self) -> usize {
        self.nmf.rank
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            epochs: self.epochs,
            lr: self.lr,
            momentum: self.momentum,
            mode: self.mode,
            salience_enabled: self.salience_enabled,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.nmf.validate()?;
        if self.epochs == 0 {
            return Err(SannError::Config("epochs must be >= 1".into()));
        }
        if self.n_hidden == 0 {
            return Err(SannError::Config("hidden layer size must be >= 1".into()));
        }
        let uses = |ids: &[ExperimentId]| ids.contains(&self.id);
        if uses(&[ExperimentId::E1, ExperimentId::E4]) && self.n_images < 20 {
            return Err(SannError::Config(format!("{} needs at least 20 images", self.id)));
        }
        if uses(&[ExperimentId::E2]) {
            if self.magnitudes.len() < 2 || !self.magnitudes.contains(&0.0) {
                return Err(SannError::Config("E2 needs at least two magnitudes including 0".into()));
            }
            if self.magnitudes.iter().any(|m| !m.is_finite()) {
                return Err(SannError::Config("magnitudes must be finite".into()));
            }
        }
        if uses(&[ExperimentId::E5]) {
            if self.amplifications.is_empty() {
                return Err(SannError::Config("E5 needs at least one amplification".into()));
            }
            if self.amplifications.contains(&0) {
                return Err(SannError::Config("amplification must be >= 1".into()));
            }
        }
        if uses(&[ExperimentId::E6]) {
            if self.hidden_sizes.is_empty() {
                return Err(SannError::Config("E6 needs at least one hidden size".into()));
            }
            if let Some(bad) = self.hidden_sizes.iter().find(|&&h| !(2..=18).contains(&h)) {
                return Err(SannError::Config(format!("hidden size {bad} outside the swept range 2..=18")));
            }
            if self.sweep_amplification == 0 {
                return Err(SannError::Config("amplification must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// `key = value` echo, written into verdict sidecars.
    pub fn echo(&self) -> Vec<(String, String)> {
        let join = |v: Vec<String>| v.join(" ");
        vec![
            ("id".into(), self.id.to_string()),
            ("images".into(), self.n_images.to_string()),
            ("persons".into(), self.n_persons.to_string()),
            ("noise_sigma".into(), self.noise_sigma.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("epochs".into(), self.epochs.to_string()),
            ("topology".into(), format!("{}-{}-1", self.n_in(), self.n_hidden)),
            ("b".into(), self.b.to_string()),
            ("t_lim".into(), self.t_lim.to_string()),
            ("lr".into(), self.lr.to_string()),
            ("momentum".into(), self.momentum.to_string()),
            ("mode".into(), self.mode.to_string()),
            ("salience_enabled".into(), self.salience_enabled.to_string()),
            ("magnitudes".into(), join(self.magnitudes.iter().map(f64::to_string).collect())),
            ("amplifications".into(), join(self.amplifications.iter().map(u32::to_string).collect())),
            ("sweep_amplification".into(), self.sweep_amplification.to_string()),
            ("hidden_sizes".into(), join(self.hidden_sizes.iter().map(usize::to_string).collect())),
            ("nmf_rank".into(), self.nmf.rank.to_string()),
            ("nmf_max_iters".into(), self.nmf.max_iters.to_string()),
            ("nmf_tol".into(), self.nmf.tol.to_string()),
        ]
    }
}
