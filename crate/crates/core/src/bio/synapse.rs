use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::map::{logistic, ComponentMap, Domain, MapSource};

/// Saturating synaptic transfer with transmission probability and delay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynapseParams {
    pub amplitude: f64,
    pub slope: f64,
    pub midpoint: f64,
    /// Transmission probability.
    #[serde(default = "one")]
    pub p: f64,
    /// Transmission delay in time steps.
    #[serde(default)]
    pub delay: u32,
}

fn one() -> f64 {
    1.0
}

impl SynapseParams {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("amplitude", self.amplitude)?;
        ensure_finite("slope", self.slope)?;
        ensure_finite("midpoint", self.midpoint)?;
        ensure_finite("p", self.p)?;
        if self.amplitude < 0.0 {
            return Err(Error::invalid("amplitude", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("p", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// `amplitude * sigmoid(slope * (x - midpoint))`
    pub fn transfer(&self, x: f64) -> f64 {
        self.amplitude * logistic(self.slope * (x - self.midpoint))
    }
}

/// Sample the synapse on `points` uniform nodes over `domain`.
pub fn synapse_map(params: &SynapseParams, domain: Domain, points: usize) -> Result<ComponentMap> {
    params.validate()?;
    domain.validate()?;
    if domain.dim() != 1 {
        return Err(Error::Dimension {
            what: "synapse domain".into(),
            expected: 1,
            got: domain.dim(),
        });
    }
    ComponentMap::from_source(MapSource::Synapse { params: *params }, domain, &[points])
}
