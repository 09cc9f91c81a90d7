//! Per-example error backpropagation for the single-hidden-layer net.
//!
//! With hidden inputs `in_j = a_j . z + b_j` (the bias is the weight from a
//! constant-1 node), hidden outputs `a_j = g(in_j)` and linear outputs
//! `y_i = sum_j beta_ij a_j`, each example applies
//!
//! ```text
//! Err_i   = t_i - y_i
//! Delta_i = Err_i                       (linear output node, g' = 1)
//! Delta_j = g'(in_j) sum_i beta_ij Delta_i
//! beta_ij <- beta_ij + alpha a_j Delta_i
//! a_jk    <- a_jk    + alpha z_k Delta_j
//! b_j     <- b_j     + alpha     Delta_j
//! ```
//!
//! All deltas are formed from the weights as they were before the example's
//! update.

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::l2::dataset_l2;
use super::report::{Method, TrainReport};
use super::slfn::Slfn;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpConfig {
    pub alpha: f64,
    pub epochs: usize,
}

/// Per-weight increments for one example, divided by `alpha`, laid out
/// like the net's `weights`, `biases` and `beta`.
pub(crate) struct Increments {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub beta: Vec<f64>,
    pub flops: u64,
}

/// Forward and backward pass for one example against the current weights.
pub(crate) fn example_increments(net: &Slfn, z: &[f64], t: &[f64]) -> Increments {
    let (d, l, m) = (net.input_dim, net.hidden, net.output_dim);
    let mut flops = 0u64;
    let pre = net.preactivations(z);
    flops += (l * (d + 1)) as u64;
    let act: Vec<f64> = pre.iter().map(|&p| net.activation.eval(p)).collect();
    flops += l as u64;
    let mut delta_out = vec![0.0; m];
    for o in 0..m {
        let y: f64 = net.beta[o * l..(o + 1) * l]
            .iter()
            .zip(&act)
            .map(|(b, a)| b * a)
            .sum();
        flops += l as u64;
        delta_out[o] = t[o] - y;
        flops += 1;
    }
    let mut delta_hidden = vec![0.0; l];
    for j in 0..l {
        let back: f64 = (0..m).map(|o| net.beta[o * l + j] * delta_out[o]).sum();
        flops += m as u64;
        delta_hidden[j] = net.activation.derivative(pre[j]) * back;
        flops += 2;
    }
    let mut beta = vec![0.0; m * l];
    for o in 0..m {
        flops += 1;
        for j in 0..l {
            beta[o * l + j] = act[j] * delta_out[o];
            flops += 1;
        }
    }
    let mut weights = vec![0.0; l * d];
    let mut biases = vec![0.0; l];
    for j in 0..l {
        flops += 1;
        for k in 0..d {
            weights[j * d + k] = z[k] * delta_hidden[j];
            flops += 1;
        }
        biases[j] = delta_hidden[j];
        flops += 1;
    }
    Increments {
        weights,
        biases,
        beta,
        flops,
    }
}

pub fn bp_train(net: &Slfn, data: &Dataset, cfg: &BpConfig) -> Result<(Slfn, TrainReport)> {
    data.validate()?;
    net.validate_structure()?;
    if !(cfg.alpha > 0.0 && cfg.alpha.is_finite()) {
        return Err(Error::invalid("alpha", "must be finite and > 0"));
    }
    if net.input_dim != data.input_dim() || net.output_dim != data.output_dim() {
        return Err(Error::Dimension {
            what: "network vs dataset".into(),
            expected: data.input_dim(),
            got: net.input_dim,
        });
    }
    let scaled: Vec<Vec<f64>> = data.inputs.iter().map(|x| net.scale_input(x)).collect();
    let mut cur = net.clone();
    let mut report = TrainReport::new(Method::Bp, net.hidden);
    let mut completed = 0;
    'epochs: for _ in 0..cfg.epochs {
        for (z, t) in scaled.iter().zip(&data.targets) {
            let inc = example_increments(&cur, z, t);
            report.flop_count += inc.flops;
            for (w, dw) in cur.beta.iter_mut().zip(&inc.beta) {
                *w += cfg.alpha * dw;
            }
            for (w, dw) in cur.weights.iter_mut().zip(&inc.weights) {
                *w += cfg.alpha * dw;
            }
            for (w, dw) in cur.biases.iter_mut().zip(&inc.biases) {
                *w += cfg.alpha * dw;
            }
            let finite = cur
                .beta
                .iter()
                .chain(&cur.weights)
                .chain(&cur.biases)
                .all(|v| v.is_finite());
            if !finite {
                report.diverged = true;
                break 'epochs;
            }
        }
        completed += 1;
    }
    report.epochs = Some(completed);
    report.final_l2 = if report.diverged {
        f64::INFINITY
    } else {
        dataset_l2(&cur, data)
    };
    report.config = serde_json::to_value(cfg)?;
    Ok((cur, report))
}
