use crate::error::{Result, SannError};
use crate::numerics::Matrix;

use super::network::SannNetwork;

/// Snapshot of one forward pass.
///
/// `v_sums` and `activations` hold the hidden nodes followed by the output nodes, in
/// the same order as [`SannNetwork::thresholds`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub input: Vec<f64>,
    pub v_sums: Vec<f64>,
    pub activations: Vec<f64>,
    pub(crate) version: u64,
    n_hidden: usize,
}

impl ForwardTrace {
    pub fn hidden(&self) -> &[f64] {
        &self.activations[..self.n_hidden]
    }

    pub fn output(&self) -> &[f64] {
        &self.activations[self.n_hidden..]
    }

    /// Network version the trace was taken at.
    pub fn version(&self) -> u64 {
        self.version
    }
}

/// Node transfer function: tanh of the weighted sum less the threshold.
#[inline]
pub fn activation(v_sum: f64, threshold: f64) -> f64 {
    (v_sum - threshold).tanh()
}

/// Derivative of tanh expressed through its output.
#[inline]
fn activation_slope(a: f64) -> f64 {
    1.0 - a * a
}

/// Gradient of `½‖target − output‖²` with respect to both weight arrays.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub ih: Matrix,
    pub ho: Matrix,
    pub error: f64,
}

impl SannNetwork {
    pub fn forward(&self, x: &[f64]) -> Result<ForwardTrace> {
        if x.len() != self.n_in() {
            return Err(SannError::Shape(format!(
                "input of length {} for a network with {} inputs",
                x.len(),
                self.n_in()
            )));
        }
        let (nh, no) = (self.n_hidden(), self.n_out());
        let mut v_sums = vec![0.0; nh + no];
        let mut activations = vec![0.0; nh + no];

        for (i, &xi) in x.iter().enumerate() {
            for (v, &w) in v_sums[..nh].iter_mut().zip(self.w_ih.row(i)) {
                *v += xi * w;
            }
        }
        for j in 0..nh {
            activations[j] = activation(v_sums[j], self.thresholds[j]);
        }
        for j in 0..nh {
            let aj = activations[j];
            for (v, &w) in v_sums[nh..].iter_mut().zip(self.w_ho.row(j)) {
                *v += aj * w;
            }
        }
        for k in nh..nh + no {
            activations[k] = activation(v_sums[k], self.thresholds[k]);
        }
        Ok(ForwardTrace {
            input: x.to_vec(),
            v_sums,
            activations,
            version: self.version,
            n_hidden: nh,
        })
    }

    /// Output vector for `x`.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.output().to_vec())
    }

    /// Analytic error gradients for one example.
    pub fn gradients(&self, x: &[f64], target: &[f64]) -> Result<Gradients> {
        if target.len() != self.n_out() {
            return Err(SannError::Shape(format!(
                "target of length {} for a network with {} outputs",
                target.len(),
                self.n_out()
            )));
        }
        let trace = self.forward(x)?;
        let (nh, no) = (self.n_hidden(), self.n_out());
        let hidden = trace.hidden();
        let output = trace.output();

        let mut error = 0.0;
        let mut out_delta = vec![0.0; no];
        for k in 0..no {
            let diff = target[k] - output[k];
            error += 0.5 * diff * diff;
            out_delta[k] = activation_slope(output[k]) * diff;
        }
        let mut hid_delta = vec![0.0; nh];
        for j in 0..nh {
            let back: f64 = self.w_ho.row(j).iter().zip(&out_delta).map(|(w, d)| w * d).sum();
            hid_delta[j] = activation_slope(hidden[j]) * back;
        }

        let mut ho = Matrix::zeros(nh, no);
        for j in 0..nh {
            for k in 0..no {
                ho[(j, k)] = -out_delta[k] * hidden[j];
            }
        }
        let mut ih = Matrix::zeros(self.n_in(), nh);
        for (i, &xi) in x.iter().enumerate() {
            for j in 0..nh {
                ih[(i, j)] = -hid_delta[j] * xi;
            }
        }
        Ok(Gradients { ih, ho, error })
    }

    /// One online gradient-descent step with momentum on `½‖target − output‖²`.
    ///
    /// Each weight moves by `-lr·∂E/∂w + momentum·previous_change`, where
    /// `previous_change` is the raw negative gradient of the previous step. Thresholds
    /// are left alone. Returns the error before the update.
    pub fn backprop_step(&mut self, x: &[f64], target: &[f64], lr: f64, momentum: f64) -> Result<f64> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(SannError::Config(format!("learning rate must be > 0, got {lr}")));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(SannError::Config(format!("momentum must be in [0, 1), got {momentum}")));
        }
        let grads = self.gradients(x, target)?;
        apply_update(&mut self.w_ho, &mut self.mom_ho, &grads.ho, lr, momentum);
        apply_update(&mut self.w_ih, &mut self.mom_ih, &grads.ih, lr, momentum);
        self.version += 1;
        if !(self.w_ih.all_finite() && self.w_ho.all_finite()) || !grads.error.is_finite() {
            return Err(SannError::Divergence("non-finite weights after backprop".into()));
        }
        Ok(grads.error)
    }
}

fn apply_update(weights: &mut Matrix, previous: &mut Matrix, grad: &Matrix, lr: f64, momentum: f64) {
    for ((w, m), g) in weights
        .as_mut_slice()
        .iter_mut()
        .zip(previous.as_mut_slice())
        .zip(grad.as_slice())
    {
        let change = -g;
        *w += lr * change + momentum * *m;
        *m = change;
    }
}
