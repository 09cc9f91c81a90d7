use serde::{Deserialize, Serialize};

use super::eval::{evaluate, Evaluation};
use super::graph::CircuitGraph;
use crate::error::{Error, Result};
use crate::rng::Stream;

/// How input values vary over the horizon.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// One value per port and trial, held for the whole horizon.
    #[default]
    Constant,
    /// A fresh value every step.
    PerStep,
}

/// Sampling law for Monte Carlo inputs: each port draws uniformly from
/// its `[lower, upper]` interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDistribution {
    pub horizon: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub mode: InputMode,
}

impl InputDistribution {
    pub fn validate(&self, ports: usize) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be >= 1"));
        }
        for (what, v) in [("lower", &self.lower), ("upper", &self.upper)] {
            if v.len() != ports {
                return Err(Error::Dimension {
                    what: format!("input distribution {what}"),
                    expected: ports,
                    got: v.len(),
                });
            }
        }
        for (k, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(
                    format!("input distribution port {k}"),
                    "bounds must be finite with lower <= upper",
                ));
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut Stream) -> Vec<Vec<f64>> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| match self.mode {
                InputMode::Constant => vec![rng.uniform(lo, hi); self.horizon],
                InputMode::PerStep => (0..self.horizon).map(|_| rng.uniform(lo, hi)).collect(),
            })
            .collect()
    }
}

/// Monte Carlo comparison of two graphs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeEstimate {
    /// Root-mean-square output deviation over all kept trials, steps and
    /// output ports.
    pub rms: f64,
    /// Largest absolute deviation seen.
    pub max_abs: f64,
    /// Root-mean-square of the original graph's outputs, for scale.
    pub reference_rms: f64,
    pub trials: usize,
    /// Trials dropped because either graph diverged.
    pub diverged: usize,
    pub seed: u64,
}

/// Root-mean-square deviation between the outputs of `original` and
/// `twinned` over `trials` input draws from `dist`, deterministic given
/// `seed`. Trials in which either graph diverges are excluded and counted.
pub fn composite_error(
    original: &CircuitGraph,
    twinned: &CircuitGraph,
    dist: &InputDistribution,
    trials: usize,
    seed: u64,
) -> Result<CompositeEstimate> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let ports = |g: &CircuitGraph| {
        (
            g.inputs.iter().map(|p| p.port.clone()).collect::<Vec<_>>(),
            g.outputs.iter().map(|p| p.port.clone()).collect::<Vec<_>>(),
        )
    };
    if ports(original) != ports(twinned) {
        return Err(Error::invalid("ports", "graphs must declare the same input and output ports"));
    }
    dist.validate(original.inputs.len())?;
    let mut rng = Stream::labeled(seed, "composite-inputs");
    let (mut sq, mut ref_sq, mut max_abs, mut count) = (0.0, 0.0, 0.0f64, 0usize);
    let mut diverged = 0;
    for _ in 0..trials {
        let inputs = dist.sample(&mut rng);
        let run = |g| match evaluate(g, &inputs, dist.horizon) {
            Ok(e) => Ok(Some(e)),
            Err(Error::Divergence { .. }) => Ok(None),
            Err(e) => Err(e),
        };
        let (Some(a), Some(b)): (Option<Evaluation>, Option<Evaluation>) = (run(original)?, run(twinned)?) else {
            diverged += 1;
            continue;
        };
        for (ya, yb) in a.outputs.iter().zip(&b.outputs) {
            for (u, v) in ya.iter().zip(yb) {
                let d = v - u;
                sq += d * d;
                ref_sq += u * u;
                max_abs = max_abs.max(d.abs());
                count += 1;
            }
        }
    }
    let mean = |s: f64| if count == 0 { f64::NAN } else { (s / count as f64).sqrt() };
    Ok(CompositeEstimate {
        rms: mean(sq),
        max_abs,
        reference_rms: mean(ref_sq),
        trials,
        diverged,
        seed,
    })
}
