use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::budget::{error_budget, split_global_delta, ErrorBudget};
use super::error_est::CompositeEstimate;
use super::graph::{CircuitGraph, ComponentKind, ComponentModel};
use crate::approx::{train_to_tolerance, Slfn, ToleranceConfig, TrainReport};
use crate::error::{Error, Result};
use crate::map::{uniform_axis, ComponentMap, SCHEMA_VERSION};
use crate::rng::derive_seed;

/// Points used to measure a twin's sup error against its original.
pub const SUP_ERROR_POINTS: usize = 8193;

/// Replace the model of `id` by `twin`, keeping the original map for
/// domain clamping, release probability and error accounting. Topology is
/// unchanged.
pub fn substitute(graph: &CircuitGraph, id: &str, twin: Slfn) -> Result<CircuitGraph> {
    let mut out = graph.clone();
    let model = out
        .model_mut(id)
        .ok_or_else(|| Error::UnknownComponent(id.to_string()))?;
    let original = match model {
        ComponentModel::Map { map } => map.clone(),
        ComponentModel::Twin { original, .. } => original.clone(),
        ComponentModel::LiveLif { .. } => {
            return Err(Error::invalid(
                id,
                "live components have no static map for a twin to stand in for",
            ))
        }
    };
    twin.validate_structure()?;
    if twin.input_dim != original.dim() || twin.output_dim != 1 {
        return Err(Error::Dimension {
            what: format!("twin of `{id}` (input, output)"),
            expected: original.dim(),
            got: if twin.input_dim != original.dim() {
                twin.input_dim
            } else {
                twin.output_dim
            },
        });
    }
    *model = ComponentModel::Twin { net: twin, original };
    Ok(out)
}

/// Largest deviation `|(twin(x) - f(x)) * p(x)|` over a dense uniform grid
/// of the original's domain, in the component's output units.
pub fn sup_error(net: &Slfn, original: &ComponentMap) -> f64 {
    let (lo, hi) = (original.domain.lower[0], original.domain.upper[0]);
    let axis = uniform_axis(lo, hi, SUP_ERROR_POINTS).expect("valid domain");
    axis.iter()
        .map(|&x| ((net.eval1(&[x]) - original.value_at(&[x])) * original.probability_at(&[x])).abs())
        .fold(0.0, f64::max)
}

/// Tolerance request for [`twinize`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DeltaBudget {
    /// The same tolerance for every component.
    Uniform { delta: f64 },
    /// Explicit tolerance per component id; every component must be listed.
    PerComponent { deltas: BTreeMap<String, f64> },
    /// One end-to-end tolerance, split by downstream gain.
    Global { delta: f64 },
}

/// Trained twin of one component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinRecord {
    pub id: String,
    pub kind: ComponentKind,
    /// Held-out L2 tolerance requested from training.
    pub delta_target: f64,
    pub seed: u64,
    pub met: bool,
    /// Achieved held-out L2 error.
    pub heldout_l2: f64,
    /// Dense-grid sup deviation, used by the error budget.
    pub sup_error: f64,
    pub net: Slfn,
    pub report: TrainReport,
}

/// Twins for every component of a graph, with the resulting error budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinAssignment {
    pub schema_version: u32,
    pub seed: u64,
    pub records: Vec<TwinRecord>,
    /// Ids whose twin missed its tolerance.
    pub unmet: Vec<String>,
    pub budget: ErrorBudget,
    /// Monte Carlo estimate of the end-to-end error, when measured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composite: Option<CompositeEstimate>,
}

impl TwinAssignment {
    /// Per-component errors fed to the budget.
    pub fn deltas(&self) -> Vec<(String, f64)> {
        self.records
            .iter()
            .map(|r| (r.id.clone(), r.sup_error))
            .collect()
    }

    /// Substitute every recorded twin into `graph`.
    pub fn apply(&self, graph: &CircuitGraph) -> Result<CircuitGraph> {
        let mut g = graph.clone();
        for r in &self.records {
            g = substitute(&g, &r.id, r.net.clone())?;
        }
        Ok(g)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn requested_deltas(graph: &CircuitGraph, budget: &DeltaBudget) -> Result<Vec<(String, f64)>> {
    let ids = graph.component_ids();
    let check = |id: &str, d: f64| {
        if d > 0.0 && d.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("delta.{id}"), "must be finite and > 0"))
        }
    };
    match budget {
        DeltaBudget::Uniform { delta } => ids
            .into_iter()
            .map(|id| check(&id, *delta).map(|_| (id, *delta)))
            .collect(),
        DeltaBudget::PerComponent { deltas } => {
            if let Some(extra) = deltas.keys().find(|k| !ids.contains(k)) {
                return Err(Error::UnknownComponent(extra.clone()));
            }
            ids.into_iter()
                .map(|id| {
                    let d = *deltas
                        .get(&id)
                        .ok_or_else(|| Error::invalid(format!("delta.{id}"), "missing"))?;
                    check(&id, d).map(|_| (id, d))
                })
                .collect()
        }
        DeltaBudget::Global { delta } => split_global_delta(graph, *delta),
    }
}

/// Train a twin for every component, in parallel, each with a seed derived
/// from `cfg.seed` and its id. Missed tolerances are listed in
/// [`TwinAssignment::unmet`]; the twinned graph is returned alongside.
pub fn twinize(
    graph: &CircuitGraph,
    budget: &DeltaBudget,
    cfg: &ToleranceConfig,
) -> Result<(TwinAssignment, CircuitGraph)> {
    if let Some(v) = graph
        .vertices
        .iter()
        .find(|v| matches!(v.model, ComponentModel::LiveLif { .. }))
    {
        return Err(Error::invalid(
            &v.id,
            "live components must be replaced by their static map before twinning",
        ));
    }
    let requested = requested_deltas(graph, budget)?;
    let records: Vec<TwinRecord> = requested
        .par_iter()
        .map(|(id, delta)| {
            let map = graph.model(id).and_then(|m| m.map()).expect("static model");
            let seed = derive_seed(cfg.seed, id);
            let component_cfg = ToleranceConfig {
                seed,
                ..cfg.clone()
            };
            let (net, report) = train_to_tolerance(map, *delta, &component_cfg)
                .map_err(|e| Error::invalid(format!("component `{id}`"), e.to_string()))?;
            Ok(TwinRecord {
                id: id.clone(),
                kind: graph.kind_of(id).expect("known id"),
                delta_target: *delta,
                seed,
                met: report.met_tolerance.unwrap_or(false),
                heldout_l2: report.heldout_l2.unwrap_or(report.final_l2),
                sup_error: sup_error(&net, map),
                net,
                report,
            })
        })
        .collect::<Result<_>>()?;
    let unmet = records
        .iter()
        .filter(|r| !r.met)
        .map(|r| r.id.clone())
        .collect();
    let deltas: Vec<(String, f64)> = records.iter().map(|r| (r.id.clone(), r.sup_error)).collect();
    let budget = error_budget(graph, &deltas)?;
    let assignment = TwinAssignment {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        records,
        unmet,
        budget,
        composite: None,
    };
    let twinned = assignment.apply(graph)?;
    Ok((assignment, twinned))
}
