//! Component parameter files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "component": { "kind": "lif", "params": { "tau": 10, "theta": 1 } },
//!   "domain": { "lower": [0], "upper": [3] },
//!   "rate": { "window_ms": 1000, "dt_ms": 0.01, "transient_ms": 50 }
//! }
//! ```
//!
//! `kind` is one of `hh` (params optional, classic constants by default),
//! `lif` (optional `"closed_form": true` to skip simulation) or `synapse`.

use serde::{Deserialize, Serialize};

use super::hh::HhParams;
use super::lif::LifParams;
use super::rate::{firing_rate_map, Exclusion, NeuronModel, RateOptions};
use super::synapse::{synapse_map, SynapseParams};
use crate::error::{Error, Result};
use crate::map::{uniform_axis, ComponentMap, Domain, MapSource, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentSpec {
    Hh {
        #[serde(default)]
        params: HhParams,
    },
    Lif {
        params: LifParams,
        #[serde(default)]
        closed_form: bool,
    },
    Synapse { params: SynapseParams },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentFile {
    pub schema_version: u32,
    pub component: ComponentSpec,
    pub domain: Domain,
    #[serde(default)]
    pub rate: RateOptions,
}

impl ComponentFile {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: ComponentFile = serde_json::from_str(s)?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        self.domain.validate()?;
        if self.domain.dim() != 1 {
            return Err(Error::Dimension {
                what: "component domain".into(),
                expected: 1,
                got: self.domain.dim(),
            });
        }
        self.rate.validate()?;
        match &self.component {
            ComponentSpec::Hh { params } => params.validate(),
            ComponentSpec::Lif { params, .. } => params.validate(),
            ComponentSpec::Synapse { params } => params.validate(),
        }
    }

    /// Build the component's map on `points` uniform nodes over its domain.
    pub fn build_map(&self, points: usize) -> Result<(ComponentMap, Vec<Exclusion>)> {
        self.validate()?;
        if points < 2 {
            return Err(Error::invalid("grid", "at least 2 grid points required"));
        }
        let (lo, hi) = (self.domain.lower[0], self.domain.upper[0]);
        match &self.component {
            ComponentSpec::Synapse { params } => {
                Ok((synapse_map(params, self.domain.clone(), points)?, Vec::new()))
            }
            ComponentSpec::Lif {
                params,
                closed_form: true,
            } => Ok((
                ComponentMap::from_source(
                    MapSource::Lif { params: *params },
                    self.domain.clone(),
                    &[points],
                )?,
                Vec::new(),
            )),
            ComponentSpec::Lif { params, .. } => {
                let grid = uniform_axis(lo, hi, points)?;
                let r = firing_rate_map(&NeuronModel::Lif(*params), self.domain.clone(), &grid, &self.rate)?;
                Ok((r.map, r.excluded))
            }
            ComponentSpec::Hh { params } => {
                let grid = uniform_axis(lo, hi, points)?;
                let r = firing_rate_map(&NeuronModel::Hh(*params), self.domain.clone(), &grid, &self.rate)?;
                Ok((r.map, r.excluded))
            }
        }
    }
}
