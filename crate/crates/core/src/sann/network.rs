use std::fmt::Write as _;

use crate::error::{Result, SannError};
use crate::numerics::{Matrix, Rng};

/// Initial weight range for input→hidden connections.
pub const INPUT_WEIGHT_RANGE: f64 = 0.2;
/// Initial weight range for hidden→output connections.
pub const OUTPUT_WEIGHT_RANGE: f64 = 2.0;

/// Single-hidden-layer perceptron with a salience-controlled threshold on every
/// hidden and output node.
///
/// Node activation is `tanh(V - T)` where `V` is the weighted input sum and `T` the
/// node threshold. Thresholds are moved only by salience (see
/// [`SannNetwork::apply_salience`]); backpropagation trains the weights alone.
#[derive(Debug, Clone, PartialEq)]
pub struct SannNetwork {
    n_in: usize,
    n_hidden: usize,
    n_out: usize,
    pub(crate) w_ih: Matrix,
    pub(crate) w_ho: Matrix,
    /// Hidden thresholds followed by output thresholds.
    pub(crate) thresholds: Vec<f64>,
    t_lim: f64,
    b: f64,
    pub(crate) mom_ih: Matrix,
    pub(crate) mom_ho: Matrix,
    /// Bumped on every mutation; traces carry the value they were taken at.
    pub(crate) version: u64,
}

impl SannNetwork {
    pub fn new(
        n_in: usize,
        n_hidden: usize,
        n_out: usize,
        t_lim: f64,
        b: f64,
        rng: &mut Rng,
    ) -> Result<Self> {
        validate_topology(n_in, n_hidden, n_out, t_lim, b)?;
        let w_ih = Matrix::from_vec(
            n_in,
            n_hidden,
            rng.uniform(-INPUT_WEIGHT_RANGE, INPUT_WEIGHT_RANGE, n_in * n_hidden)?,
        )?;
        let w_ho = Matrix::from_vec(
            n_hidden,
            n_out,
            rng.uniform(-OUTPUT_WEIGHT_RANGE, OUTPUT_WEIGHT_RANGE, n_hidden * n_out)?,
        )?;
        Self::from_parts(w_ih, w_ho, vec![0.0; n_hidden + n_out], t_lim, b)
    }

    /// Assembles a network from explicit weights and thresholds. Momentum starts at zero.
    pub fn from_parts(
        w_ih: Matrix,
        w_ho: Matrix,
        thresholds: Vec<f64>,
        t_lim: f64,
        b: f64,
    ) -> Result<Self> {
        let (n_in, n_hidden) = w_ih.shape();
        let n_out = w_ho.cols();
        validate_topology(n_in, n_hidden, n_out, t_lim, b)?;
        if w_ho.rows() != n_hidden {
            return Err(SannError::Shape(format!(
                "hidden→output weights have {} rows, expected {n_hidden}",
                w_ho.rows()
            )));
        }
        if thresholds.len() != n_hidden + n_out {
            return Err(SannError::Shape(format!(
                "{} thresholds for {} thresholded nodes",
                thresholds.len(),
                n_hidden + n_out
            )));
        }
        if thresholds.iter().any(|t| !t.is_finite() || t.abs() > t_lim) {
            return Err(SannError::Range(format!(
                "thresholds must lie within ±{t_lim}"
            )));
        }
        Ok(Self {
            n_in,
            n_hidden,
            n_out,
            mom_ih: Matrix::zeros(n_in, n_hidden),
            mom_ho: Matrix::zeros(n_hidden, n_out),
            w_ih,
            w_ho,
            thresholds,
            t_lim,
            b,
            version: 0,
        })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn t_lim(&self) -> f64 {
        self.t_lim
    }

    /// Salience influence rate.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn w_ih(&self) -> &Matrix {
        &self.w_ih
    }

    pub fn w_ho(&self) -> &Matrix {
        &self.w_ho
    }

    /// Hidden thresholds followed by output thresholds.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn set_threshold(&mut self, node: usize, value: f64) -> Result<()> {
        if !value.is_finite() || value.abs() > self.t_lim {
            return Err(SannError::Range(format!(
                "threshold {value} outside ±{}",
                self.t_lim
            )));
        }
        self.thresholds[node] = value;
        self.version += 1;
        Ok(())
    }

    pub fn set_weight_ih(&mut self, i: usize, j: usize, value: f64) {
        self.w_ih[(i, j)] = value;
        self.version += 1;
    }

    pub fn set_weight_ho(&mut self, j: usize, k: usize, value: f64) {
        self.w_ho[(j, k)] = value;
        self.version += 1;
    }

    pub fn all_finite(&self) -> bool {
        self.w_ih.all_finite() && self.w_ho.all_finite() && self.thresholds.iter().all(|t| t.is_finite())
    }

    /// `SANN <n_in> <n_hidden> <n_out> <t_lim> <b>` then w_ih, w_ho and thresholds,
    /// each value with 17 significant digits. Momentum is not persisted.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "SANN {} {} {} {:.16e} {:.16e}\n",
            self.n_in, self.n_hidden, self.n_out, self.t_lim, self.b
        );
        for m in [&self.w_ih, &self.w_ho] {
            for i in 0..m.rows() {
                push_line(&mut out, m.row(i));
            }
        }
        push_line(&mut out, &self.thresholds);
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_ascii_whitespace();
        if tokens.next() != Some("SANN") {
            return Err(SannError::Parse("missing `SANN` header".into()));
        }
        let mut next = |name: &str| {
            tokens
                .next()
                .ok_or_else(|| SannError::Parse(format!("missing {name}")))
                .map(str::to_owned)
        };
        let count = |s: String, name: &str| -> Result<usize> {
            s.parse().map_err(|e| SannError::Parse(format!("bad {name}: {e}")))
        };
        let real = |s: String| -> Result<f64> {
            s.parse().map_err(|e| SannError::Parse(format!("bad value {s:?}: {e}")))
        };
        let n_in = count(next("n_in")?, "n_in")?;
        let n_hidden = count(next("n_hidden")?, "n_hidden")?;
        let n_out = count(next("n_out")?, "n_out")?;
        let t_lim = real(next("t_lim")?)?;
        let b = real(next("b")?)?;
        let mut take = |n: usize| -> Result<Vec<f64>> {
            (0..n).map(|_| real(next("value")?)).collect()
        };
        let w_ih = Matrix::from_vec(n_in, n_hidden, take(n_in * n_hidden)?)?;
        let w_ho = Matrix::from_vec(n_hidden, n_out, take(n_hidden * n_out)?)?;
        let thresholds = take(n_hidden + n_out)?;
        if next("eof").is_ok() {
            return Err(SannError::Parse("trailing data after thresholds".into()));
        }
        Self::from_parts(w_ih, w_ho, thresholds, t_lim, b)
    }
}

fn push_line(out: &mut String, values: &[f64]) {
    let line: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    let _ = writeln!(out, "{}", line.join(" "));
}

fn validate_topology(n_in: usize, n_hidden: usize, n_out: usize, t_lim: f64, b: f64) -> Result<()> {
    if n_in == 0 || n_hidden == 0 || n_out == 0 {
        return Err(SannError::Config(format!(
            "layer sizes must be >= 1, got {n_in}-{n_hidden}-{n_out}"
        )));
    }
    if !(t_lim > 0.0 && t_lim.is_finite()) {
        return Err(SannError::Config(format!("threshold limit must be > 0, got {t_lim}")));
    }
    if !(b > 0.0 && b <= 1.0) {
        return Err(SannError::Config(format!("salience influence must be in (0, 1], got {b}")));
    }
    Ok(())
}

/// Builds a randomly initialized network: input→hidden weights uniform in ±0.2,
/// hidden→output weights uniform in ±2.0, all thresholds 0.
pub fn init_network(
    n_in: usize,
    n_hidden: usize,
    n_out: usize,
    t_lim: f64,
    b: f64,
    rng: &mut Rng,
) -> Result<SannNetwork> {
    SannNetwork::new(n_in, n_hidden, n_out, t_lim, b, rng)
}
