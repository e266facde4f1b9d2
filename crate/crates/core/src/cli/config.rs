//! Flat `key = value` settings files.
//!
//! ```text
//! # E5 on a smaller set
//! images = 60
//! amplifications = 1 2 3
//! mode = literal-eq2
//! ```
//!
//! List values are whitespace- or comma-separated. Unknown keys are errors.

use crate::error::{Result, SannError};
use crate::experiments::ExperimentConfig;

/// Every key a settings file may contain.
pub const CONFIG_KEYS: [&str; 21] = [
    "images",
    "persons",
    "noise_sigma",
    "seed",
    "epochs",
    "hidden",
    "b",
    "t_lim",
    "lr",
    "momentum",
    "mode",
    "salience_enabled",
    "magnitudes",
    "amplifications",
    "sweep_amplification",
    "hidden_sizes",
    "nmf_rank",
    "nmf_max_iters",
    "nmf_tol",
    "amplification",
    "single_trial",
];

/// Everything a command can be configured with.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub exp: ExperimentConfig,
    /// Single-trial amplification used by `train --single-trial`.
    pub amplification: u32,
    pub single_trial: bool,
}

impl Settings {
    pub fn new(exp: ExperimentConfig) -> Self {
        Self {
            exp,
            amplification: 1,
            single_trial: false,
        }
    }
}

/// Parses settings text into `(key, value)` pairs, in file order.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| SannError::Config(format!("config line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(SannError::Config(format!(
                "config line {}: unknown key {key:?} (known: {})",
                n + 1,
                CONFIG_KEYS.join(", ")
            )));
        }
        out.push((key.to_owned(), value.trim().to_owned()));
    }
    Ok(out)
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| SannError::Config(format!("{key} = {value:?}: {e}")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| scalar(key, s))
        .collect()
}

/// Applies one setting. Range checks happen later, when the config is validated.
pub fn apply_setting(settings: &mut Settings, key: &str, value: &str) -> Result<()> {
    let exp = &mut settings.exp;
    match key {
        "images" => exp.n_images = scalar(key, value)?,
        "persons" => exp.n_persons = scalar(key, value)?,
        "noise_sigma" => exp.noise_sigma = scalar(key, value)?,
        "seed" => exp.seed = scalar(key, value)?,
        "epochs" => exp.epochs = scalar(key, value)?,
        "hidden" => exp.n_hidden = scalar(key, value)?,
        "b" => exp.b = scalar(key, value)?,
        "t_lim" => exp.t_lim = scalar(key, value)?,
        "lr" => exp.lr = scalar(key, value)?,
        "momentum" => exp.momentum = scalar(key, value)?,
        "mode" => exp.mode = value.parse()?,
        "salience_enabled" => exp.salience_enabled = scalar(key, value)?,
        "magnitudes" => exp.magnitudes = list(key, value)?,
        "amplifications" => exp.amplifications = list(key, value)?,
        "sweep_amplification" => exp.sweep_amplification = scalar(key, value)?,
        "hidden_sizes" => exp.hidden_sizes = list(key, value)?,
        "nmf_rank" => exp.nmf.rank = scalar(key, value)?,
        "nmf_max_iters" => exp.nmf.max_iters = scalar(key, value)?,
        "nmf_tol" => exp.nmf.tol = scalar(key, value)?,
        "amplification" => {
            let a: u32 = scalar(key, value)?;
            if a == 0 {
                return Err(SannError::Config("amplification must be >= 1".into()));
            }
            settings.amplification = a;
        }
        "single_trial" => settings.single_trial = scalar(key, value)?,
        _ => return Err(SannError::Config(format!("unknown key {key:?}"))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentId;
    use crate::sann::SalienceMode;

    #[test]
    fn parses_comments_and_lists() {
        let pairs = parse_config("# header\nepochs = 50  # short\n\namplifications = 1, 2 3\nmode=literal-eq2\n").unwrap();
        let mut s = Settings::new(ExperimentConfig::new(ExperimentId::E5));
        for (k, v) in &pairs {
            apply_setting(&mut s, k, v).unwrap();
        }
        assert_eq!(s.exp.epochs, 50);
        assert_eq!(s.exp.amplifications, vec![1, 2, 3]);
        assert_eq!(s.exp.mode, SalienceMode::LiteralEq2);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(matches!(parse_config("learning_rate = 0.1"), Err(SannError::Config(_))));
        assert!(matches!(parse_config("epochs 10"), Err(SannError::Config(_))));
        let mut s = Settings::new(ExperimentConfig::new(ExperimentId::E1));
        assert!(apply_setting(&mut s, "epochs", "ten").is_err());
        assert!(apply_setting(&mut s, "amplification", "0").is_err());
    }
}
