//! Correlation statistics.

use crate::error::{Result, SannError};

/// Variance (population, per element) below this is treated as a constant sequence.
pub const CONSTANT_VARIANCE: f64 = 1e-15;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample Pearson correlation coefficient.
///
/// Errors on unequal lengths, fewer than two points, or a (near-)constant sequence.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(SannError::Shape(format!(
            "pearson on sequences of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(SannError::Degenerate(
            "pearson needs at least two points".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx / n < CONSTANT_VARIANCE || syy / n < CONSTANT_VARIANCE {
        return Err(SannError::Degenerate(
            "pearson on a constant sequence".into(),
        ));
    }
    // sqrt(sxx·syy) rather than sqrt(sxx)·sqrt(syy): identical inputs give exactly 1.
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based fractional ranks; ties receive the mean of the ranks they span.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation: Pearson on tie-averaged ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(SannError::Shape(format!(
            "spearman on sequences of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    pearson(&ranks(x), &ranks(y))
}
