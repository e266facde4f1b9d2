//! Synthetic face-like images for offline runs.
//!
//! Each person is a base image: a uniform background plus a handful of Gaussian
//! "parts" of random position, width and (signed) amplitude, clipped to `[0, 1]`. An
//! image is its person's base plus per-pixel Gaussian noise, clipped again.
//!
//! The layout mirrors the face set the experiments expect: images 2, 3, 9, 10 and 11
//! (1-based) all show person [`SALIENT_PERSON`], and nobody else does. Every other
//! image cycles through the remaining persons.

use crate::error::{Result, SannError};
use crate::numerics::Rng;

use super::Image;

/// 1-based indices of the five images that share one person.
pub const SAME_PERSON_INDICES: [usize; 5] = [2, 3, 9, 10, 11];
/// Person label of [`SAME_PERSON_INDICES`].
pub const SALIENT_PERSON: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n_images: usize,
    pub n_persons: usize,
    /// Side length; images are square.
    pub image_size: usize,
    pub noise_sigma: f64,
    /// Gaussian parts per person.
    pub parts: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_images: 100,
            n_persons: 20,
            image_size: 19,
            noise_sigma: 0.05,
            parts: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub images: Vec<Image>,
    /// Person label per image, same order as `images`.
    pub persons: Vec<usize>,
    /// Noise-free base image per person.
    pub bases: Vec<Image>,
}

/// Person label for 1-based image `index`.
fn person_of(index: usize, n_persons: usize, others_seen: &mut usize) -> usize {
    if SAME_PERSON_INDICES.contains(&index) || n_persons == 1 {
        SALIENT_PERSON
    } else {
        let p = 1 + *others_seen % (n_persons - 1);
        *others_seen += 1;
        p
    }
}

fn base_image(cfg: &SynthConfig, rng: &mut Rng) -> Result<Image> {
    let side = cfg.image_size;
    let background = 0.15 + 0.5 * rng.next_f64();
    let mut px = vec![background; side * side];
    for _ in 0..cfg.parts {
        let cy = rng.next_f64() * side as f64;
        let cx = rng.next_f64() * side as f64;
        let width = 1.5 + 2.5 * rng.next_f64();
        let amp = -0.4 + 0.9 * rng.next_f64();
        for y in 0..side {
            for x in 0..side {
                let d2 = (y as f64 - cy).powi(2) + (x as f64 - cx).powi(2);
                px[y * side + x] += amp * (-d2 / (2.0 * width * width)).exp();
            }
        }
    }
    for p in &mut px {
        *p = p.clamp(0.0, 1.0);
    }
    Image::new(side, side, px)
}

/// Generates `n_images` noisy images of `n_persons` people.
pub fn synth_dataset(cfg: &SynthConfig, rng: &mut Rng) -> Result<SynthDataset> {
    if cfg.n_persons == 0 {
        return Err(SannError::Config("need at least one person".into()));
    }
    let last = *SAME_PERSON_INDICES.last().unwrap();
    if cfg.n_images < last {
        return Err(SannError::Config(format!(
            "the same-person layout needs at least {last} images, got {}",
            cfg.n_images
        )));
    }
    if cfg.image_size == 0 {
        return Err(SannError::Config("image size must be >= 1".into()));
    }
    if !(cfg.noise_sigma >= 0.0 && cfg.noise_sigma.is_finite()) {
        return Err(SannError::Config(format!("noise sigma must be >= 0, got {}", cfg.noise_sigma)));
    }
    let bases = (0..cfg.n_persons)
        .map(|_| base_image(cfg, rng))
        .collect::<Result<Vec<_>>>()?;

    let mut images = Vec::with_capacity(cfg.n_images);
    let mut persons = Vec::with_capacity(cfg.n_images);
    let mut others_seen = 0;
    for index in 1..=cfg.n_images {
        let person = person_of(index, cfg.n_persons, &mut others_seen);
        let base = &bases[person];
        let px = base
            .pixels()
            .iter()
            .map(|&b| {
                let noise = if cfg.noise_sigma > 0.0 {
                    rng.normal(0.0, cfg.noise_sigma)?
                } else {
                    0.0
                };
                Ok((b + noise).clamp(0.0, 1.0))
            })
            .collect::<Result<Vec<_>>>()?;
        images.push(Image::new(cfg.image_size, cfg.image_size, px)?);
        persons.push(person);
    }
    Ok(SynthDataset { images, persons, bases })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: &Image, b: &Image) -> f64 {
        a.pixels()
            .iter()
            .zip(b.pixels())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn noiseless_images_of_a_person_are_identical() {
        let cfg = SynthConfig { noise_sigma: 0.0, ..Default::default() };
        let ds = synth_dataset(&cfg, &mut Rng::new(1)).unwrap();
        for i in 0..ds.images.len() {
            for j in 0..ds.images.len() {
                if ds.persons[i] == ds.persons[j] {
                    assert_eq!(ds.images[i], ds.images[j]);
                }
            }
        }
    }

    #[test]
    fn layout() {
        let ds = synth_dataset(&SynthConfig::default(), &mut Rng::new(1)).unwrap();
        for idx in SAME_PERSON_INDICES {
            assert_eq!(ds.persons[idx - 1], SALIENT_PERSON);
        }
        assert_eq!(ds.persons[1], ds.persons[8]);
        let count = ds.persons.iter().filter(|&&p| p == SALIENT_PERSON).count();
        assert_eq!(count, 5);
        assert_eq!(ds.images.len(), 100);
        assert!(ds.images.iter().all(|i| i.width() == 19 && i.height() == 19));
    }

    #[test]
    fn deterministic() {
        let a = synth_dataset(&SynthConfig::default(), &mut Rng::new(9)).unwrap();
        let b = synth_dataset(&SynthConfig::default(), &mut Rng::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_counts() {
        let mut rng = Rng::new(0);
        for cfg in [
            SynthConfig { n_persons: 0, ..Default::default() },
            SynthConfig { n_images: 10, ..Default::default() },
            SynthConfig { image_size: 0, ..Default::default() },
            SynthConfig { noise_sigma: -0.1, ..Default::default() },
        ] {
            assert!(matches!(synth_dataset(&cfg, &mut rng), Err(SannError::Config(_))));
        }
    }

    #[test]
    fn clusters_are_separated() {
        for seed in 0..5 {
            let cfg = SynthConfig { noise_sigma: 0.08, n_images: 60, ..Default::default() };
            let ds = synth_dataset(&cfg, &mut Rng::new(seed)).unwrap();
            let (mut within, mut nw, mut between, mut nb) = (0.0, 0, 0.0, 0);
            for i in 0..ds.images.len() {
                for j in i + 1..ds.images.len() {
                    let d = dist(&ds.images[i], &ds.images[j]);
                    if ds.persons[i] == ds.persons[j] {
                        within += d;
                        nw += 1;
                    } else {
                        between += d;
                        nb += 1;
                    }
                }
            }
            assert!(within / (nw as f64) < between / (nb as f64), "seed {seed}");
        }
    }
}
