//! Salience-driven threshold plasticity and the reverse salience readout.
//!
//! During training a scalar salience `S` is broadcast to every hidden and output node.
//! Each node moves its threshold in a direction set by the signs of `S` and of its own
//! activation:
//!
//! | activation \ salience | S > 0    | S < 0    |
//! |-----------------------|----------|----------|
//! | A > 0                 | decrease | increase |
//! | A < 0                 | increase | decrease |
//!
//! At test time each node reports `A·(T − V)` and the network sums those values.

use std::fmt;
use std::str::FromStr;

use crate::dataset::control_input;
use crate::error::{Result, SannError};

use super::network::SannNetwork;
use super::propagate::ForwardTrace;

/// Which threshold update rule [`SannNetwork::apply_salience_with`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SalienceMode {
    /// `T ← (1−η)·T + η·D·T_lim` with `η = min(1, B·|S|·|A|)`. Follows the direction
    /// table above and keeps every threshold inside `±T_lim` by convexity.
    #[default]
    Fig7,
    /// `T ← T − B·(T + |A|·D·T_lim)`, the update as literally printed. Uses `S` only
    /// through its sign and drives thresholds toward `A·T_lim` for positive salience.
    LiteralEq2,
}

impl SalienceMode {
    pub const ALL: [SalienceMode; 2] = [SalienceMode::Fig7, SalienceMode::LiteralEq2];

    pub fn as_str(self) -> &'static str {
        match self {
            SalienceMode::Fig7 => "fig7",
            SalienceMode::LiteralEq2 => "literal-eq2",
        }
    }
}

impl fmt::Display for SalienceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SalienceMode {
    type Err = SannError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig7" => Ok(SalienceMode::Fig7),
            "literal-eq2" => Ok(SalienceMode::LiteralEq2),
            other => Err(SannError::Config(format!(
                "unknown salience mode {other:?} (expected fig7 or literal-eq2)"
            ))),
        }
    }
}

/// Salience attached to a training example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalienceTag {
    /// Signed salience; 0 means none.
    pub s: f64,
    amplification: u32,
}

impl Default for SalienceTag {
    fn default() -> Self {
        Self::NONE
    }
}

impl SalienceTag {
    pub const NONE: SalienceTag = SalienceTag {
        s: 0.0,
        amplification: 1,
    };

    pub fn new(s: f64) -> Self {
        Self { s, amplification: 1 }
    }

    pub fn amplified(s: f64, amplification: u32) -> Result<Self> {
        if amplification == 0 {
            return Err(SannError::Config("amplification must be >= 1".into()));
        }
        Ok(Self { s, amplification })
    }

    pub fn amplification(&self) -> u32 {
        self.amplification
    }

    /// `s × amplification`.
    pub fn effective(&self) -> f64 {
        self.s * f64::from(self.amplification)
    }

    pub fn is_salient(&self) -> bool {
        self.s != 0.0
    }
}

/// Direction of threshold adjustment: `0` when `u_act·s == 0`, else `−sign(u_act·s)`.
pub fn d_adj(u_act: f64, s: f64) -> i8 {
    let p = u_act * s;
    if p > 0.0 {
        -1
    } else if p < 0.0 {
        1
    } else {
        0
    }
}

/// Summed reverse salience and its per-node terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverseSalience {
    pub total: f64,
    /// Hidden nodes then output nodes.
    pub per_node: Vec<f64>,
}

impl SannNetwork {
    /// Moves thresholds with the default ([`SalienceMode::Fig7`]) rule.
    pub fn apply_salience(&mut self, trace: &ForwardTrace, s_eff: f64) -> Result<()> {
        self.apply_salience_with(trace, s_eff, SalienceMode::Fig7)
    }

    /// Moves every hidden and output threshold according to `mode`, using the
    /// activations recorded in `trace`. The trace must come from this network in its
    /// current state.
    pub fn apply_salience_with(&mut self, trace: &ForwardTrace, s_eff: f64, mode: SalienceMode) -> Result<()> {
        if trace.version != self.version || trace.activations.len() != self.thresholds.len() {
            return Err(SannError::StaleTrace {
                trace: trace.version,
                network: self.version,
            });
        }
        if !s_eff.is_finite() {
            return Err(SannError::Domain(format!("salience {s_eff} is not finite")));
        }
        if s_eff == 0.0 {
            return Ok(());
        }
        let (t_lim, b) = (self.t_lim(), self.b());
        for (t, &a) in self.thresholds.iter_mut().zip(&trace.activations) {
            let d = f64::from(d_adj(a, s_eff));
            let next = match mode {
                SalienceMode::Fig7 => {
                    let eta = (b * s_eff.abs() * a.abs()).min(1.0);
                    (1.0 - eta) * *t + eta * d * t_lim
                }
                SalienceMode::LiteralEq2 => *t - b * (*t + a.abs() * d * t_lim),
            };
            // Both rules are convex combinations of points inside ±t_lim; the clamp
            // only absorbs rounding.
            *t = next.clamp(-t_lim, t_lim);
        }
        self.version += 1;
        Ok(())
    }

    /// Per-node `A·(T − V)` and their sum.
    ///
    /// `trace` should come from this network; the current thresholds are used.
    pub fn reverse_salience(&self, trace: &ForwardTrace) -> ReverseSalience {
        debug_assert_eq!(trace.activations.len(), self.thresholds.len());
        let per_node: Vec<f64> = trace
            .activations
            .iter()
            .zip(&trace.v_sums)
            .zip(&self.thresholds)
            .map(|((&a, &v), &t)| a * (t - v))
            .collect();
        ReverseSalience {
            total: per_node.iter().sum(),
            per_node,
        }
    }

    /// Reverse salience of `x` minus that of the all-0.5 control input.
    pub fn relative_reverse_salience(&self, x: &[f64]) -> Result<f64> {
        let probe = self.reverse_salience(&self.forward(x)?).total;
        let control = self
            .reverse_salience(&self.forward(&control_input(self.n_in())?)?)
            .total;
        Ok(probe - control)
    }
}
