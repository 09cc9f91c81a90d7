//! Randomised hidden layer with output weights from a direct dense solve.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::l2::dataset_l2;
use super::linalg::ridge_solve;
use super::report::{Method, TrainReport};
use super::slfn::{Activation, Slfn};
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Half-width of the uniform law for hidden weights and biases (inputs are
/// scaled to `[-1, 1]^d` first).
pub const DEFAULT_HIDDEN_RANGE: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElmConfig {
    pub hidden: usize,
    pub activation: Activation,
    pub ridge: f64,
    pub seed: u64,
    pub hidden_range: f64,
}

impl Default for ElmConfig {
    fn default() -> Self {
        ElmConfig {
            hidden: 64,
            activation: Activation::Sigmoid,
            ridge: 1e-8,
            seed: 0,
            hidden_range: DEFAULT_HIDDEN_RANGE,
        }
    }
}

/// Draw `hidden` nodes. Node `i` consumes `input_dim` weights then its bias
/// from the `"hidden"` stream, so a larger net extends a smaller one drawn
/// with the same seed.
pub fn draw_hidden(seed: u64, input_dim: usize, hidden: usize, range: f64) -> (Vec<f64>, Vec<f64>) {
    let mut s = Stream::labeled(seed, "hidden");
    let mut weights = Vec::with_capacity(hidden * input_dim);
    let mut biases = Vec::with_capacity(hidden);
    for _ in 0..hidden {
        for _ in 0..input_dim {
            weights.push(s.uniform(-range, range));
        }
        biases.push(s.uniform(-range, range));
    }
    (weights, biases)
}

pub fn elm_train(data: &Dataset, cfg: &ElmConfig) -> Result<(Slfn, TrainReport)> {
    data.validate()?;
    if cfg.hidden == 0 {
        return Err(Error::invalid("hidden", "need at least one hidden node"));
    }
    if !(cfg.ridge >= 0.0 && cfg.ridge.is_finite()) {
        return Err(Error::invalid("ridge", "must be finite and >= 0"));
    }
    if !(cfg.hidden_range > 0.0 && cfg.hidden_range.is_finite()) {
        return Err(Error::invalid("hidden_range", "must be finite and > 0"));
    }
    let (d, l, m, n) = (data.input_dim(), cfg.hidden, data.output_dim(), data.len());
    let (weights, biases) = draw_hidden(cfg.seed, d, l, cfg.hidden_range);
    let mut net = Slfn::new(
        cfg.activation,
        d,
        l,
        m,
        weights,
        biases,
        vec![0.0; m * l],
        Some(data.domain.clone()),
    )?;
    // Rows are scaled by the square roots of the quadrature weights
    // (normalised to mean one) so the solve minimises the reported
    // discrete L2 error.
    let w = data.quadrature_weights();
    let mean_w = w.iter().sum::<f64>() / n as f64;
    let root_w: Vec<f64> = w.iter().map(|wk| (wk / mean_w).sqrt()).collect();
    let mut h = DMatrix::zeros(n, l);
    for (k, x) in data.inputs.iter().enumerate() {
        for (i, v) in net.hidden_outputs(x).into_iter().enumerate() {
            h[(k, i)] = root_w[k] * v;
        }
    }
    let t = DMatrix::from_fn(n, m, |k, o| root_w[k] * data.targets[k][o]);
    let sol = ridge_solve(&h, &t, cfg.ridge);
    for o in 0..m {
        for i in 0..l {
            net.beta[o * l + i] = sol.beta[(i, o)];
        }
    }
    if net.beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::Divergence {
            step: 0,
            what: "non-finite output weights".into(),
        });
    }
    let mut report = TrainReport::new(Method::Elm, l);
    report.seed = Some(cfg.seed);
    report.final_l2 = dataset_l2(&net, data);
    report.rank_deficient = sol.rank_deficient && cfg.ridge == 0.0;
    report.flop_count = (n * l * (d + 3) + n * m) as u64 + sol.flops;
    report.config = serde_json::to_value(cfg)?;
    Ok((net, report))
}
