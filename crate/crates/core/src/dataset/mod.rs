//! Images, synthetic face-like datasets and network-ready samples.

mod manifest;
mod pgm;
mod synth;

use rayon::prelude::*;

use crate::error::{Result, SannError};
use crate::nmf::{nmf_encode, NmfConfig};
use crate::numerics::{Matrix, Rng};
use crate::sann::{Example, SalienceTag};

pub use manifest::{read_manifest, write_manifest, ManifestRow};
pub use pgm::{load_pgm, write_pgm, PgmFormat};
pub use synth::{synth_dataset, SynthConfig, SynthDataset, SALIENT_PERSON, SAME_PERSON_INDICES};

/// Grayscale image with pixels in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(SannError::Shape(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(SannError::Domain("pixels must lie in [0, 1]".into()));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }
}

/// Arithmetic mean of the pixels.
pub fn mean_grayscale(img: &Image) -> Result<f64> {
    if img.pixels.is_empty() {
        return Err(SannError::Domain("mean of an image with no pixels".into()));
    }
    Ok(img.pixels.iter().sum::<f64>() / img.pixels.len() as f64)
}

/// The all-0.5 probe used as the reverse-salience baseline.
pub fn control_input(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(SannError::Config("control input needs at least one component".into()));
    }
    Ok(vec![0.5; n])
}

/// Network-ready example derived from one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// NMF coefficients, min-max scaled into `[0, 1]`.
    pub features: Vec<f64>,
    /// Mean grayscale of the source image.
    pub target: f64,
    pub tag: SalienceTag,
    /// 1-based position of the source image.
    pub source_index: usize,
}

impl Example for Sample {
    fn features(&self) -> &[f64] {
        &self.features
    }

    fn target(&self) -> &[f64] {
        std::slice::from_ref(&self.target)
    }

    fn tag(&self) -> SalienceTag {
        self.tag
    }
}

/// Per-dimension min and max of the training features.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalingSpec {
    pub fn fit(rows: &[Vec<f64>], dims: usize) -> Self {
        if rows.is_empty() {
            return Self {
                min: vec![0.0; dims],
                max: vec![0.0; dims],
            };
        }
        let mut min = vec![f64::INFINITY; dims];
        let mut max = vec![f64::NEG_INFINITY; dims];
        for row in rows {
            for (d, &v) in row.iter().enumerate() {
                min[d] = min[d].min(v);
                max[d] = max[d].max(v);
            }
        }
        Self { min, max }
    }

    pub fn dims(&self) -> usize {
        self.min.len()
    }

    /// Maps each dimension to `[0, 1]`, clamping values outside the fitted range.
    /// Constant dimensions map to 0.5.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| {
                if hi > lo {
                    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            })
            .collect()
    }
}

/// Encodes every image against `basis` and turns the coefficients into samples.
///
/// With `scaling == None` the scaling is fitted on these images and returned;
/// otherwise the given spec is applied (with clamping) and returned unchanged. Image
/// `i` is encoded with `rng.derive(i)`, so results do not depend on thread scheduling.
/// All tags start as [`SalienceTag::NONE`].
pub fn build_samples(
    images: &[Image],
    basis: &Matrix,
    cfg: &NmfConfig,
    scaling: Option<&ScalingSpec>,
    rng: &Rng,
) -> Result<(Vec<Sample>, ScalingSpec)> {
    if basis.cols() != cfg.rank {
        return Err(SannError::Shape(format!(
            "basis has rank {} but the encoder is configured for {}",
            basis.cols(),
            cfg.rank
        )));
    }
    if let Some(spec) = scaling {
        if spec.dims() != cfg.rank {
            return Err(SannError::Shape(format!(
                "scaling has {} dimensions, basis rank is {}",
                spec.dims(),
                cfg.rank
            )));
        }
    }
    let raw: Vec<Vec<f64>> = images
        .par_iter()
        .enumerate()
        .map(|(i, img)| nmf_encode(basis, img.pixels(), cfg, &mut rng.derive(i as u64)))
        .collect::<Result<_>>()?;
    let spec = match scaling {
        Some(s) => s.clone(),
        None => ScalingSpec::fit(&raw, cfg.rank),
    };
    let samples = raw
        .iter()
        .zip(images)
        .enumerate()
        .map(|(i, (coeffs, img))| {
            Ok(Sample {
                features: spec.apply(coeffs),
                target: mean_grayscale(img)?,
                tag: SalienceTag::NONE,
                source_index: i + 1,
            })
        })
        .collect::<Result<_>>()?;
    Ok((samples, spec))
}
