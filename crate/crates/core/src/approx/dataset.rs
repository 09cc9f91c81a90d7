use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{ComponentMap, Domain, SCHEMA_VERSION};

/// Training samples on a compact box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dataset {
    pub schema_version: u32,
    pub domain: Domain,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    /// Per-sample quadrature weights; uniform `volume / n` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(
        domain: Domain,
        inputs: Vec<Vec<f64>>,
        targets: Vec<Vec<f64>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let d = Dataset {
            schema_version: SCHEMA_VERSION,
            domain,
            inputs,
            targets,
            weights,
        };
        d.validate()?;
        Ok(d)
    }

    /// Value channel of a map on its own grid, with its quadrature weights.
    pub fn from_map(map: &ComponentMap) -> Self {
        Dataset {
            schema_version: SCHEMA_VERSION,
            domain: map.domain.clone(),
            inputs: map.nodes(),
            targets: map.value.iter().map(|&v| vec![v]).collect(),
            weights: Some(map.quadrature_weights()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.inputs.is_empty() {
            return Err(Error::invalid("inputs", "dataset is empty"));
        }
        if self.inputs.len() != self.targets.len() {
            return Err(Error::Dimension {
                what: "targets".into(),
                expected: self.inputs.len(),
                got: self.targets.len(),
            });
        }
        let d = self.domain.dim();
        let m = self.targets[0].len();
        if m == 0 {
            return Err(Error::invalid("targets", "empty target vectors"));
        }
        for (k, (x, t)) in self.inputs.iter().zip(&self.targets).enumerate() {
            if x.len() != d {
                return Err(Error::Dimension {
                    what: format!("inputs[{k}]"),
                    expected: d,
                    got: x.len(),
                });
            }
            if t.len() != m {
                return Err(Error::Dimension {
                    what: format!("targets[{k}]"),
                    expected: m,
                    got: t.len(),
                });
            }
            if x.iter().chain(t).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("sample {k}")));
            }
            if !self.domain.contains(x) {
                return Err(Error::invalid(format!("inputs[{k}]"), "outside domain"));
            }
        }
        if let Some(w) = &self.weights {
            if w.len() != self.inputs.len() {
                return Err(Error::Dimension {
                    what: "weights".into(),
                    expected: self.inputs.len(),
                    got: w.len(),
                });
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::invalid("weights", "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let d: Dataset = serde_json::from_str(s)?;
        d.validate()?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn output_dim(&self) -> usize {
        self.targets[0].len()
    }

    pub fn quadrature_weights(&self) -> Vec<f64> {
        self.weights
            .clone()
            .unwrap_or_else(|| vec![self.domain.volume() / self.len() as f64; self.len()])
    }
}
