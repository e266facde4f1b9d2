//! Shared data path: synthetic faces → NMF basis → scaled coefficients → samples.

use crate::dataset::{build_samples, synth_dataset, Sample, SynthConfig, SynthDataset};
use crate::error::Result;
use crate::nmf::{nmf_factorize, NmfModel};
use crate::numerics::{Matrix, Rng};
use crate::sann::{init_network, SalienceTag, SannNetwork};

use super::ExperimentConfig;

/// 1-based images trained with salience.
pub const SALIENT_INDICES: [usize; 3] = [9, 10, 11];

// Stream ids under the experiment seed.
pub(crate) const STREAM_DATA: u64 = 0;
pub(crate) const STREAM_NMF: u64 = 1;
pub(crate) const STREAM_ENCODE: u64 = 2;
pub(crate) const STREAM_NET: u64 = 3;
/// Sweep point `k` initializes its network from stream `STREAM_SWEEP + k`.
pub(crate) const STREAM_SWEEP: u64 = 100;

#[derive(Debug, Clone)]
pub struct Prepared {
    pub data: SynthDataset,
    pub model: NmfModel,
    /// One sample per image, all tags cleared.
    pub samples: Vec<Sample>,
    root: Rng,
}

impl Prepared {
    /// Network with the configured topology, initialized from the experiment seed.
    pub fn network(&self, cfg: &ExperimentConfig) -> Result<SannNetwork> {
        init_network(cfg.n_in(), cfg.n_hidden, 1, cfg.t_lim, cfg.b, &mut self.root.derive(STREAM_NET))
    }

    /// Network for sweep point `k` with `n_hidden` hidden units.
    pub fn sweep_network(&self, cfg: &ExperimentConfig, n_hidden: usize, k: usize) -> Result<SannNetwork> {
        init_network(
            cfg.n_in(),
            n_hidden,
            1,
            cfg.t_lim,
            cfg.b,
            &mut self.root.derive(STREAM_SWEEP + k as u64),
        )
    }

    pub fn features(&self) -> Vec<&[f64]> {
        self.samples.iter().map(|s| s.features.as_slice()).collect()
    }
}

/// Builds the dataset, basis and samples for `cfg`.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let root = Rng::new(cfg.seed);
    let synth = SynthConfig {
        n_images: cfg.n_images,
        n_persons: cfg.n_persons,
        noise_sigma: cfg.noise_sigma,
        ..SynthConfig::default()
    };
    let data = synth_dataset(&synth, &mut root.derive(STREAM_DATA))?;
    let columns: Vec<Vec<f64>> = data.images.iter().map(|i| i.pixels().to_vec()).collect();
    let v = Matrix::from_columns(&columns)?;
    let model = nmf_factorize(&v, &cfg.nmf, &mut root.derive(STREAM_NMF))?;
    let (samples, _) = build_samples(&data.images, model.w(), &cfg.nmf, None, &root.derive(STREAM_ENCODE))?;
    Ok(Prepared {
        data,
        model,
        samples,
        root,
    })
}

/// Copy of `samples` with `tag` on [`SALIENT_INDICES`] and no salience elsewhere.
pub fn salient_tags(samples: &[Sample], tag: SalienceTag) -> Vec<Sample> {
    samples
        .iter()
        .map(|s| Sample {
            tag: if SALIENT_INDICES.contains(&s.source_index) {
                tag
            } else {
                SalienceTag::NONE
            },
            ..s.clone()
        })
        .collect()
}
