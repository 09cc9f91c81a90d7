use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::approx::Slfn;
use crate::bio::LifParams;
use crate::error::{ensure_finite, Error, Result};
use crate::map::ComponentMap;

/// Integrate-and-fire vertex simulated step by step instead of through its
/// static map. Each graph step lasts `step_ms`; the output is the number of
/// spikes in the step divided by `step_ms` (spikes per ms).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiveLif {
    pub params: LifParams,
    #[serde(default = "default_step_ms")]
    pub step_ms: f64,
}

/// Guard against unbounded inputs driving unbounded spike counts.
const MAX_SPIKES_PER_STEP: usize = 1_000_000;

fn default_step_ms() -> f64 {
    1.0
}

impl LiveLif {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        ensure_finite("step_ms", self.step_ms)?;
        if self.step_ms <= 0.0 {
            return Err(Error::invalid("step_ms", "must be > 0"));
        }
        Ok(())
    }

    /// Advance the membrane `v` under constant input `i` for one step and
    /// return the spike count. Threshold crossing times are exact.
    pub(crate) fn advance(&self, v: &mut f64, i: f64) -> usize {
        let p = &self.params;
        let mut left = self.step_ms;
        let mut spikes = 0;
        while i > p.theta && *v <= p.theta {
            let to_spike = p.tau * ((i - *v) / (i - p.theta)).ln();
            if to_spike > left {
                break;
            }
            left -= to_spike;
            spikes += 1;
            *v = p.v_reset;
            if spikes >= MAX_SPIKES_PER_STEP {
                break;
            }
        }
        *v = i + (*v - i) * (-left / p.tau).exp();
        spikes
    }
}

/// How a vertex or edge turns its input into its output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentModel {
    /// The component's own static map.
    Map { map: ComponentMap },
    /// A trained network standing in for `original`; inputs are clamped to
    /// the original domain and the original probability channel is kept.
    Twin { net: Slfn, original: ComponentMap },
    /// Dynamic integrate-and-fire neuron (vertices only).
    LiveLif { lif: LiveLif },
}

impl ComponentModel {
    /// Static map of the component, if it has one.
    pub fn map(&self) -> Option<&ComponentMap> {
        match self {
            ComponentModel::Map { map } => Some(map),
            ComponentModel::Twin { original, .. } => Some(original),
            ComponentModel::LiveLif { .. } => None,
        }
    }

    pub(crate) fn value(&self, x: f64) -> f64 {
        match self {
            ComponentModel::Map { map } => map.value_at(&[x]),
            ComponentModel::Twin { net, original } => net.eval1(&original.domain.clamp(&[x])),
            ComponentModel::LiveLif { .. } => unreachable!("live vertices are stepped"),
        }
    }

    pub(crate) fn probability(&self, x: f64) -> f64 {
        self.map().map_or(1.0, |m| m.probability_at(&[x]))
    }

    fn validate(&self, id: &str) -> Result<()> {
        match self {
            ComponentModel::Map { map } => {
                map.validate()?;
                check_scalar(id, map)
            }
            ComponentModel::Twin { net, original } => {
                original.validate()?;
                net.validate_structure()?;
                check_scalar(id, original)?;
                if net.input_dim != 1 || net.output_dim != 1 {
                    return Err(Error::Dimension {
                        what: format!("twin of `{id}`"),
                        expected: 1,
                        got: net.input_dim.max(net.output_dim),
                    });
                }
                Ok(())
            }
            ComponentModel::LiveLif { lif } => lif.validate(),
        }
    }
}

fn check_scalar(id: &str, map: &ComponentMap) -> Result<()> {
    if map.dim() != 1 {
        return Err(Error::Dimension {
            what: format!("input of component `{id}` (vertex inputs are summed to a scalar)"),
            expected: 1,
            got: map.dim(),
        });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    pub model: ComponentModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub source: String,
    pub target: String,
    pub model: ComponentModel,
    /// Steps between the source's output and its arrival at the target.
    pub delay: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub port: String,
    pub vertex: String,
}

/// Directed circuit: neurons are vertices, synapses are edges. A vertex
/// applies its map to the sum of its external input and arriving edge
/// outputs; an edge applies its map to its source's output `delay` steps
/// earlier and scales it by its release probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircuitGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    /// Vertex indices in an order compatible with zero-delay edges.
    #[serde(skip)]
    pub(crate) order: Vec<usize>,
    /// Incoming edge indices per vertex.
    #[serde(skip)]
    pub(crate) incoming: Vec<Vec<usize>>,
    /// Source and target vertex indices per edge.
    #[serde(skip)]
    pub(crate) ends: Vec<(usize, usize)>,
}

/// Which kind of component an id names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Vertex,
    Edge,
}

impl CircuitGraph {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>, inputs: Vec<Port>, outputs: Vec<Port>) -> Result<Self> {
        let mut ids = HashSet::new();
        for id in vertices.iter().map(|v| &v.id).chain(edges.iter().map(|e| &e.id)) {
            if id.is_empty() {
                return Err(Error::invalid("id", "component ids must be non-empty"));
            }
            if !ids.insert(id.clone()) {
                return Err(Error::invalid("id", format!("duplicate component id `{id}`")));
            }
        }
        let index: HashMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        for v in &vertices {
            v.model.validate(&v.id)?;
        }
        let mut ends = Vec::with_capacity(edges.len());
        for e in &edges {
            if matches!(e.model, ComponentModel::LiveLif { .. }) {
                return Err(Error::invalid(
                    format!("edges.{}", e.id),
                    "live models are only allowed on vertices",
                ));
            }
            e.model.validate(&e.id)?;
            let s = *index
                .get(e.source.as_str())
                .ok_or_else(|| Error::UnknownComponent(e.source.clone()))?;
            let t = *index
                .get(e.target.as_str())
                .ok_or_else(|| Error::UnknownComponent(e.target.clone()))?;
            ends.push((s, t));
        }
        for (what, ports) in [("inputs", &inputs), ("outputs", &outputs)] {
            let mut names = HashSet::new();
            for p in ports {
                if !names.insert(p.port.as_str()) {
                    return Err(Error::invalid(what, format!("duplicate port `{}`", p.port)));
                }
                if !index.contains_key(p.vertex.as_str()) {
                    return Err(Error::UnknownComponent(p.vertex.clone()));
                }
            }
        }
        let mut incoming = vec![Vec::new(); vertices.len()];
        for (k, &(_, t)) in ends.iter().enumerate() {
            incoming[t].push(k);
        }
        let order = zero_delay_order(&vertices, &edges, &ends)?;
        Ok(CircuitGraph {
            vertices,
            edges,
            inputs,
            outputs,
            order,
            incoming,
            ends,
        })
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn kind_of(&self, id: &str) -> Option<ComponentKind> {
        if self.vertex_index(id).is_some() {
            Some(ComponentKind::Vertex)
        } else if self.edge_index(id).is_some() {
            Some(ComponentKind::Edge)
        } else {
            None
        }
    }

    pub fn model(&self, id: &str) -> Option<&ComponentModel> {
        self.vertices
            .iter()
            .find(|v| v.id == id)
            .map(|v| &v.model)
            .or_else(|| self.edges.iter().find(|e| e.id == id).map(|e| &e.model))
    }

    pub(crate) fn model_mut(&mut self, id: &str) -> Option<&mut ComponentModel> {
        if let Some(v) = self.vertices.iter_mut().find(|v| v.id == id) {
            return Some(&mut v.model);
        }
        self.edges.iter_mut().find(|e| e.id == id).map(|e| &mut e.model)
    }

    /// Component ids, vertices first, in declaration order.
    pub fn component_ids(&self) -> Vec<String> {
        self.vertices
            .iter()
            .map(|v| v.id.clone())
            .chain(self.edges.iter().map(|e| e.id.clone()))
            .collect()
    }
}

/// Topological order of vertices over zero-delay edges, or the ids along a
/// zero-delay cycle.
fn zero_delay_order(vertices: &[Vertex], edges: &[Edge], ends: &[(usize, usize)]) -> Result<Vec<usize>> {
    let n = vertices.len();
    let mut out_edges = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for (k, &(s, t)) in ends.iter().enumerate() {
        if edges[k].delay == 0 {
            out_edges[s].push(k);
            indeg[t] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..n).rev().filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(v);
        for &k in out_edges[v].iter().rev() {
            let t = ends[k].1;
            indeg[t] -= 1;
            if indeg[t] == 0 {
                ready.push(t);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Walk backwards along zero-delay edges inside the remainder until a
    // vertex repeats.
    let stuck: HashSet<usize> = (0..n).filter(|&v| indeg[v] > 0).collect();
    let mut v = *stuck.iter().min().expect("non-empty");
    let mut seen: Vec<usize> = Vec::new();
    let mut via: Vec<usize> = Vec::new();
    loop {
        if let Some(pos) = seen.iter().position(|&u| u == v) {
            let mut cycle = Vec::new();
            for (u, k) in seen[pos..].iter().zip(&via[pos..]) {
                cycle.push(vertices[*u].id.clone());
                cycle.push(edges[*k].id.clone());
            }
            cycle.reverse();
            return Err(Error::AlgebraicLoop(cycle));
        }
        seen.push(v);
        let k = (0..edges.len())
            .find(|&k| edges[k].delay == 0 && ends[k].1 == v && stuck.contains(&ends[k].0))
            .expect("stuck vertex has a stuck zero-delay predecessor");
        via.push(k);
        v = ends[k].0;
    }
}
