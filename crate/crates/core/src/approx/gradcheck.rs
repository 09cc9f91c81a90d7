//! Finite-difference check of the backpropagation increments.

use serde::{Deserialize, Serialize};

use super::bp::example_increments;
use super::dataset::Dataset;
use super::slfn::Slfn;
use crate::error::{Error, Result};

/// Comparison of `sum_examples increment / alpha` with the central
/// difference `-(E(w+h) - E(w-h)) / 2h` of the total loss
/// `E = 1/2 sum_examples |t - y|^2`, for every weight (hidden weights, then
/// biases, then output weights).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    /// `|a - b| / max(|a|, |b|, floor)` with `floor = 1e-2 * max_j |a_j|`.
    pub relative_deviation: Vec<f64>,
    pub max_deviation: f64,
    pub step: f64,
}

fn total_loss(net: &Slfn, scaled: &[Vec<f64>], targets: &[Vec<f64>]) -> f64 {
    let mut e = 0.0;
    for (z, t) in scaled.iter().zip(targets) {
        let pre = net.preactivations(z);
        let act: Vec<f64> = pre.iter().map(|&p| net.activation.eval(p)).collect();
        for (o, to) in t.iter().enumerate() {
            let y: f64 = net.beta[o * net.hidden..(o + 1) * net.hidden]
                .iter()
                .zip(&act)
                .map(|(b, a)| b * a)
                .sum();
            e += 0.5 * (to - y) * (to - y);
        }
    }
    e
}

fn param_mut(net: &mut Slfn, k: usize) -> &mut f64 {
    let (nw, nb) = (net.weights.len(), net.biases.len());
    if k < nw {
        &mut net.weights[k]
    } else if k < nw + nb {
        &mut net.biases[k - nw]
    } else {
        &mut net.beta[k - nw - nb]
    }
}

pub fn bp_gradient_check(net: &Slfn, data: &Dataset, h: f64) -> Result<GradientCheck> {
    data.validate()?;
    net.validate_structure()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("h", "step must be finite and > 0"));
    }
    if net.input_dim != data.input_dim() || net.output_dim != data.output_dim() {
        return Err(Error::Dimension {
            what: "network vs dataset".into(),
            expected: data.input_dim(),
            got: net.input_dim,
        });
    }
    let scaled: Vec<Vec<f64>> = data.inputs.iter().map(|x| net.scale_input(x)).collect();
    let p = net.param_count();
    let mut analytic = vec![0.0; p];
    for (z, t) in scaled.iter().zip(&data.targets) {
        let inc = example_increments(net, z, t);
        for (a, v) in analytic
            .iter_mut()
            .zip(inc.weights.iter().chain(&inc.biases).chain(&inc.beta))
        {
            *a += v;
        }
    }
    let mut work = net.clone();
    let mut numeric = vec![0.0; p];
    for (k, num) in numeric.iter_mut().enumerate() {
        let w0 = *param_mut(&mut work, k);
        *param_mut(&mut work, k) = w0 + h;
        let ep = total_loss(&work, &scaled, &data.targets);
        *param_mut(&mut work, k) = w0 - h;
        let em = total_loss(&work, &scaled, &data.targets);
        *param_mut(&mut work, k) = w0;
        *num = -(ep - em) / (2.0 * h);
    }
    let scale = analytic.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let floor = (1e-2 * scale).max(f64::MIN_POSITIVE);
    let relative_deviation: Vec<f64> = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(floor))
        .collect();
    let max_deviation = relative_deviation.iter().cloned().fold(0.0, f64::max);
    Ok(GradientCheck {
        analytic,
        numeric,
        relative_deviation,
        max_deviation,
        step: h,
    })
}
