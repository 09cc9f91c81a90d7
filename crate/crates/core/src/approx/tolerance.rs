//! Grow or train a network until it meets an L2 tolerance on a held-out
//! grid.

use serde::{Deserialize, Serialize};

use super::bp::{bp_train, BpConfig};
use super::dataset::Dataset;
use super::elm::{draw_hidden, elm_train, ElmConfig, DEFAULT_HIDDEN_RANGE};
use super::report::{Method, TrainReport};
use super::slfn::{Activation, Slfn};
use crate::error::{Error, Result};
use crate::map::{grid_nodes, ComponentMap};
use crate::smoothness::{detect_discontinuities, CheckConfig};

/// First hidden-layer size tried by ELM growth.
pub const ELM_START_HIDDEN: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub method: Method,
    /// Largest hidden layer (ELM) or total epochs (BP).
    pub budget: usize,
    pub seed: u64,
    pub activation: Activation,
    /// Ridge parameter for ELM solves.
    pub ridge: f64,
    pub hidden_range: f64,
    /// Hidden layer size for BP.
    pub bp_hidden: usize,
    pub bp_alpha: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            method: Method::Elm,
            budget: 512,
            seed: 0,
            activation: Activation::Sigmoid,
            ridge: 1e-8,
            hidden_range: DEFAULT_HIDDEN_RANGE,
            bp_hidden: 16,
            bp_alpha: 0.05,
        }
    }
}

/// Cell midpoints of the map's grid with cell-volume weights and targets
/// taken from the map itself (exact for maps with a closed form,
/// interpolated otherwise).
pub fn heldout_grid(target: &ComponentMap) -> Dataset {
    let mids: Vec<Vec<f64>> = target
        .axes
        .iter()
        .map(|a| a.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect())
        .collect();
    let widths: Vec<Vec<f64>> = target
        .axes
        .iter()
        .map(|a| a.windows(2).map(|w| w[1] - w[0]).collect())
        .collect();
    let inputs = grid_nodes(&mids);
    let weights = grid_nodes(&widths)
        .into_iter()
        .map(|w| w.iter().product())
        .collect();
    let targets = inputs.iter().map(|x| vec![target.value_at(x)]).collect();
    Dataset {
        schema_version: crate::map::SCHEMA_VERSION,
        domain: target.domain.clone(),
        inputs,
        targets,
        weights: Some(weights),
    }
}

fn heldout_error(net: &Slfn, grid: &Dataset) -> f64 {
    let w = grid.quadrature_weights();
    grid.inputs
        .iter()
        .zip(&grid.targets)
        .zip(&w)
        .map(|((x, t), w)| {
            let e = net.eval1(x) - t[0];
            w * e * e
        })
        .sum::<f64>()
        .sqrt()
}

/// Train an approximator of `target` until its held-out L2 error is below
/// `delta` or the budget runs out. ELM doubles the hidden layer from
/// [`ELM_START_HIDDEN`]; BP trains a fixed hidden layer in doubling epoch
/// chunks. The first success is returned, otherwise the net with the lowest
/// held-out error, with `met_tolerance = false` either way recorded in the
/// report.
pub fn train_to_tolerance(
    target: &ComponentMap,
    delta: f64,
    cfg: &ToleranceConfig,
) -> Result<(Slfn, TrainReport)> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("delta", "must be finite and > 0"));
    }
    if cfg.budget == 0 {
        return Err(Error::invalid("budget", "must be >= 1"));
    }
    let certificate = detect_discontinuities(target, &CheckConfig::default())?;
    if !certificate.piecewise_continuous {
        return Err(Error::invalid(
            "target",
            "value channel is not certified piecewise continuous",
        ));
    }
    let data = Dataset::from_map(target);
    let grid = heldout_grid(target);
    let (net, mut report) = match cfg.method {
        Method::Elm => grow_elm(&data, &grid, delta, cfg)?,
        Method::Bp => train_bp(&data, &grid, delta, cfg)?,
    };
    report.seed = Some(cfg.seed);
    report.config = serde_json::json!({ "delta": delta, "tolerance": cfg });
    Ok((net, report))
}

fn grow_elm(data: &Dataset, grid: &Dataset, delta: f64, cfg: &ToleranceConfig) -> Result<(Slfn, TrainReport)> {
    let mut best: Option<(Slfn, TrainReport, f64)> = None;
    let mut history = Vec::new();
    let mut flops = 0u64;
    let mut hidden = ELM_START_HIDDEN.min(cfg.budget);
    loop {
        let elm = ElmConfig {
            hidden,
            activation: cfg.activation,
            ridge: cfg.ridge,
            seed: cfg.seed,
            hidden_range: cfg.hidden_range,
        };
        let (net, report) = elm_train(data, &elm)?;
        flops += report.flop_count;
        let err = heldout_error(&net, grid);
        history.push((hidden, 0, err));
        if best.as_ref().is_none_or(|b| err < b.2) {
            best = Some((net, report, err));
        }
        if err < delta || hidden >= cfg.budget {
            break;
        }
        hidden = (2 * hidden).min(cfg.budget);
    }
    let (net, mut report, err) = best.expect("at least one candidate");
    report.heldout_l2 = Some(err);
    report.met_tolerance = Some(err < delta);
    report.history = history;
    report.flop_count = flops;
    Ok((net, report))
}

fn train_bp(data: &Dataset, grid: &Dataset, delta: f64, cfg: &ToleranceConfig) -> Result<(Slfn, TrainReport)> {
    let d = data.input_dim();
    let (weights, biases) = draw_hidden(cfg.seed, d, cfg.bp_hidden, cfg.hidden_range);
    let mut net = Slfn::new(
        cfg.activation,
        d,
        cfg.bp_hidden,
        1,
        weights,
        biases,
        vec![0.0; cfg.bp_hidden],
        Some(data.domain.clone()),
    )?;
    let mut best = (net.clone(), heldout_error(&net, grid), 0usize);
    let mut history = vec![(cfg.bp_hidden, 0, best.1)];
    let mut report = TrainReport::new(Method::Bp, cfg.bp_hidden);
    let (mut done, mut chunk) = (0usize, 1usize);
    while done < cfg.budget && best.1 >= delta {
        let epochs = chunk.min(cfg.budget - done);
        let (next, r) = bp_train(
            &net,
            data,
            &BpConfig {
                alpha: cfg.bp_alpha,
                epochs,
            },
        )?;
        report.flop_count += r.flop_count;
        done += r.epochs.unwrap_or(0);
        if r.diverged {
            report.diverged = true;
            break;
        }
        net = next;
        let err = heldout_error(&net, grid);
        history.push((cfg.bp_hidden, done, err));
        if err < best.1 {
            best = (net.clone(), err, done);
        }
        chunk *= 2;
    }
    let (net, err, epochs) = best;
    report.final_l2 = super::l2::dataset_l2(&net, data);
    report.heldout_l2 = Some(err);
    report.epochs = Some(epochs);
    report.met_tolerance = Some(err < delta);
    report.history = history;
    Ok((net, report))
}
