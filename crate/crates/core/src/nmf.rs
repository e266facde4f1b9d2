//! Non-negative matrix factorization `V ≈ WH` with Euclidean multiplicative updates.
//!
//! `V` is pixels × images, `W` is pixels × rank (the parts basis) and `H` is
//! rank × images (per-image coefficients). [`nmf_encode`] projects a new image onto a
//! fixed basis by running the `H` update alone. That single-column update must not
//! normalize `h` between iterations: with one column, row normalization would
//! collapse every coefficient to the same scale.

use std::fmt::Write as _;

use crate::error::{Result, SannError};
use crate::numerics::{mat_mul, Matrix, Rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmfConfig {
    pub rank: usize,
    pub max_iters: usize,
    /// Stop once the relative change in residual between sweeps drops below this.
    pub tol: f64,
    /// Added to multiplicative-update denominators.
    pub epsilon: f64,
}

impl Default for NmfConfig {
    fn default() -> Self {
        Self {
            rank: 49,
            max_iters: 500,
            tol: 1e-5,
            epsilon: 1e-9,
        }
    }
}

impl NmfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(SannError::Config("NMF rank must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(SannError::Config("NMF max_iters must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(SannError::Config("NMF tol must be > 0".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(SannError::Config("NMF epsilon must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfModel {
    w: Matrix,
    h: Matrix,
}

impl NmfModel {
    pub fn new(w: Matrix, h: Matrix) -> Result<Self> {
        if w.cols() != h.rows() {
            return Err(SannError::Shape(format!(
                "W has {} columns but H has {} rows",
                w.cols(),
                h.rows()
            )));
        }
        if w.cols() == 0 {
            return Err(SannError::Shape("NMF rank must be >= 1".into()));
        }
        if w.as_slice().iter().chain(h.as_slice()).any(|&v| v < 0.0) {
            return Err(SannError::Domain("NMF factors must be non-negative".into()));
        }
        Ok(Self { w, h })
    }

    pub fn w(&self) -> &Matrix {
        &self.w
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn rank(&self) -> usize {
        self.w.cols()
    }

    /// Serializes as `NMF <rows> <r> <cols>` then W and H row-major, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("NMF {} {} {}\n", self.w.rows(), self.rank(), self.h.cols());
        write_values(&mut out, &self.w);
        write_values(&mut out, &self.h);
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_ascii_whitespace();
        if tokens.next() != Some("NMF") {
            return Err(SannError::Parse("missing `NMF` header".into()));
        }
        let mut dim = |name: &str| -> Result<usize> {
            tokens
                .next()
                .ok_or_else(|| SannError::Parse(format!("missing {name} in header")))?
                .parse()
                .map_err(|e| SannError::Parse(format!("bad {name}: {e}")))
        };
        let rows = dim("rows")?;
        let rank = dim("rank")?;
        let cols = dim("cols")?;
        let values: Vec<f64> = tokens
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| SannError::Parse(format!("bad value {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        let expected = rows * rank + rank * cols;
        if values.len() != expected {
            return Err(SannError::Parse(format!(
                "expected {expected} values, found {}",
                values.len()
            )));
        }
        let (wv, hv) = values.split_at(rows * rank);
        Self::new(
            Matrix::from_vec(rows, rank, wv.to_vec())?,
            Matrix::from_vec(rank, cols, hv.to_vec())?,
        )
    }
}

fn write_values(out: &mut String, m: &Matrix) {
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

fn check_non_negative(v: &Matrix, what: &str) -> Result<()> {
    if let Some(bad) = v.as_slice().iter().find(|&&x| x < 0.0) {
        return Err(SannError::Domain(format!(
            "{what} has negative entry {bad}"
        )));
    }
    Ok(())
}

/// Frobenius residual `‖V − WH‖`.
pub fn residual(v: &Matrix, w: &Matrix, h: &Matrix) -> Result<f64> {
    Ok(v.sub(&mat_mul(w, h)?)?.frobenius_norm())
}

/// `H ← H ∘ (WᵀV) / (WᵀWH + ε)`
fn update_h(v: &Matrix, w: &Matrix, h: &mut Matrix, eps: f64) -> Result<()> {
    let wt = w.transpose();
    let num = mat_mul(&wt, v)?;
    let den = mat_mul(&mat_mul(&wt, w)?, h)?;
    for ((hv, n), d) in h
        .as_mut_slice()
        .iter_mut()
        .zip(num.as_slice())
        .zip(den.as_slice())
    {
        *hv *= n / (d + eps);
    }
    Ok(())
}

/// `W ← W ∘ (VHᵀ) / (WHHᵀ + ε)`
fn update_w(v: &Matrix, w: &mut Matrix, h: &Matrix, eps: f64) -> Result<()> {
    let ht = h.transpose();
    let num = mat_mul(v, &ht)?;
    let den = mat_mul(w, &mat_mul(h, &ht)?)?;
    for ((wv, n), d) in w
        .as_mut_slice()
        .iter_mut()
        .zip(num.as_slice())
        .zip(den.as_slice())
    {
        *wv *= n / (d + eps);
    }
    Ok(())
}

/// Result of a factorization run with its residual trace.
#[derive(Debug, Clone)]
pub struct NmfFit {
    pub model: NmfModel,
    /// Residual after initialization, then after every full sweep.
    pub residuals: Vec<f64>,
}

impl NmfFit {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("at least the initial residual")
    }
}

pub fn nmf_factorize(v: &Matrix, cfg: &NmfConfig, rng: &mut Rng) -> Result<NmfModel> {
    nmf_factorize_traced(v, cfg, rng).map(|fit| fit.model)
}

/// Factorizes `v`, recording the residual after each sweep.
pub fn nmf_factorize_traced(v: &Matrix, cfg: &NmfConfig, rng: &mut Rng) -> Result<NmfFit> {
    cfg.validate()?;
    if v.rows() == 0 || v.cols() == 0 {
        return Err(SannError::Shape("cannot factorize an empty matrix".into()));
    }
    check_non_negative(v, "input matrix")?;
    let mut w = Matrix::from_vec(v.rows(), cfg.rank, rng.positive_unit(v.rows() * cfg.rank))?;
    let mut h = Matrix::from_vec(cfg.rank, v.cols(), rng.positive_unit(cfg.rank * v.cols()))?;

    let mut residuals = vec![residual(v, &w, &h)?];
    for _ in 0..cfg.max_iters {
        update_h(v, &w, &mut h, cfg.epsilon)?;
        update_w(v, &mut w, &h, cfg.epsilon)?;
        let r = residual(v, &w, &h)?;
        let prev = *residuals.last().unwrap();
        residuals.push(r);
        if converged(prev, r, cfg.tol) {
            break;
        }
    }
    if !(w.all_finite() && h.all_finite()) {
        return Err(SannError::Divergence("NMF produced non-finite factors".into()));
    }
    Ok(NmfFit {
        model: NmfModel::new(w, h)?,
        residuals,
    })
}

fn converged(prev: f64, cur: f64, tol: f64) -> bool {
    if prev == 0.0 {
        return true;
    }
    ((prev - cur) / prev).abs() < tol
}

/// `WH`.
pub fn nmf_reconstruct(model: &NmfModel) -> Matrix {
    mat_mul(&model.w, &model.h).expect("model invariant: W.cols == H.rows")
}

/// Coefficients of `v_col` against the fixed basis `w`.
pub fn nmf_encode(w: &Matrix, v_col: &[f64], cfg: &NmfConfig, rng: &mut Rng) -> Result<Vec<f64>> {
    nmf_encode_traced(w, v_col, cfg, rng).map(|(h, _)| h)
}

/// As [`nmf_encode`], also returning the residual after init and after each update.
pub fn nmf_encode_traced(
    w: &Matrix,
    v_col: &[f64],
    cfg: &NmfConfig,
    rng: &mut Rng,
) -> Result<(Vec<f64>, Vec<f64>)> {
    cfg.validate()?;
    if v_col.len() != w.rows() {
        return Err(SannError::Shape(format!(
            "column of length {} against a basis with {} rows",
            v_col.len(),
            w.rows()
        )));
    }
    check_non_negative(w, "basis")?;
    if v_col.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(SannError::Domain("encoded column must be non-negative".into()));
    }
    let r = w.cols();
    let v = Matrix::from_vec(v_col.len(), 1, v_col.to_vec())?;
    let mut h = Matrix::from_vec(r, 1, rng.positive_unit(r))?;

    // WᵀV and WᵀW are fixed while W is held constant.
    let wt = w.transpose();
    let wtv = mat_mul(&wt, &v)?;
    let wtw = mat_mul(&wt, w)?;

    let mut residuals = vec![residual(&v, w, &h)?];
    for _ in 0..cfg.max_iters {
        let den = mat_mul(&wtw, &h)?;
        for a in 0..r {
            h[(a, 0)] *= wtv[(a, 0)] / (den[(a, 0)] + cfg.epsilon);
        }
        let res = residual(&v, w, &h)?;
        let prev = *residuals.last().unwrap();
        residuals.push(res);
        if converged(prev, res, cfg.tol) {
            break;
        }
    }
    Ok((h.into_vec(), residuals))
}
