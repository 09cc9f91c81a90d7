//! Steady-state f–I maps extracted by simulation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hh::{simulate_hh, HhParams, HhState, DEFAULT_DT};
use super::lif::{simulate_lif, LifParams};
use crate::error::{ensure_finite, Error, Result};
use crate::map::{ComponentMap, Domain};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NeuronModel {
    Hh(HhParams),
    Lif(LifParams),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateOptions {
    /// Counting window after the transient (ms).
    pub window_ms: f64,
    pub dt_ms: f64,
    /// Initial stretch discarded before counting (ms).
    pub transient_ms: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        RateOptions {
            window_ms: 1000.0,
            dt_ms: DEFAULT_DT,
            transient_ms: 50.0,
        }
    }
}

impl RateOptions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("window_ms", self.window_ms),
            ("dt_ms", self.dt_ms),
            ("transient_ms", self.transient_ms),
        ] {
            ensure_finite(name, v)?;
        }
        if self.window_ms <= 0.0 {
            return Err(Error::invalid("window_ms", "must be > 0"));
        }
        if self.dt_ms <= 0.0 {
            return Err(Error::invalid("dt_ms", "must be > 0"));
        }
        if self.transient_ms < 0.0 {
            return Err(Error::invalid("transient_ms", "must be >= 0"));
        }
        Ok(())
    }
}

/// A grid point dropped because its simulation diverged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub input: f64,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct RateMap {
    pub map: ComponentMap,
    pub excluded: Vec<Exclusion>,
}

/// Rate from spike times inside the counting window: with two or more
/// spikes, the reciprocal mean inter-spike interval; otherwise the plain
/// count over the window.
pub fn rate_from_spikes(spikes: &[f64], start: f64, window: f64) -> f64 {
    let inside: Vec<f64> = spikes
        .iter()
        .copied()
        .filter(|&t| t >= start && t <= start + window)
        .collect();
    match inside.len() {
        0 | 1 => inside.len() as f64 / window,
        n => (n - 1) as f64 / (inside[n - 1] - inside[0]),
    }
}

fn point_rate(model: &NeuronModel, i: f64, opts: &RateOptions) -> Result<std::result::Result<f64, String>> {
    let total = opts.transient_ms + opts.window_ms;
    match model {
        NeuronModel::Hh(p) => {
            let run = simulate_hh(p, HhState::resting(), i, total, opts.dt_ms, false)?;
            if let Some(step) = run.diverged_at {
                return Ok(Err(format!("non-finite state at step {step}")));
            }
            Ok(Ok(rate_from_spikes(&run.spike_times, opts.transient_ms, opts.window_ms)))
        }
        NeuronModel::Lif(p) => {
            let spikes = simulate_lif(p, i, total, opts.dt_ms)?;
            Ok(Ok(rate_from_spikes(&spikes, opts.transient_ms, opts.window_ms)))
        }
    }
}

/// Simulate `model` at every input of `grid` (strictly increasing, inside
/// `domain`) and collect the rates into a 1-D map.
pub fn firing_rate_map(
    model: &NeuronModel,
    domain: Domain,
    grid: &[f64],
    opts: &RateOptions,
) -> Result<RateMap> {
    opts.validate()?;
    domain.validate()?;
    match model {
        NeuronModel::Hh(p) => p.validate()?,
        NeuronModel::Lif(p) => p.validate()?,
    }
    if domain.dim() != 1 {
        return Err(Error::Dimension {
            what: "rate map domain".into(),
            expected: 1,
            got: domain.dim(),
        });
    }
    if grid.len() < 2 {
        return Err(Error::invalid("grid", "at least 2 input currents required"));
    }
    if grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::invalid("grid", "currents must be strictly increasing"));
    }
    if !grid.iter().all(|&x| domain.contains(&[x])) {
        return Err(Error::invalid("grid", "currents must lie inside the domain"));
    }
    let results: Vec<_> = grid
        .par_iter()
        .map(|&i| point_rate(model, i, opts))
        .collect::<Result<_>>()?;
    let mut axis = Vec::new();
    let mut value = Vec::new();
    let mut excluded = Vec::new();
    for (&i, r) in grid.iter().zip(results) {
        match r {
            Ok(rate) => {
                axis.push(i);
                value.push(rate);
            }
            Err(reason) => excluded.push(Exclusion { input: i, reason }),
        }
    }
    if axis.len() < 2 {
        return Err(Error::invalid(
            "grid",
            format!("only {} grid points survived simulation", axis.len()),
        ));
    }
    let map = ComponentMap::from_samples(domain, vec![axis], value, None, None)?;
    Ok(RateMap { map, excluded })
}
