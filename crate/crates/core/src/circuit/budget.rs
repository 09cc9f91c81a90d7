use serde::{Deserialize, Serialize};

use super::graph::{CircuitGraph, ComponentKind, ComponentModel};
use crate::error::{Error, Result};
use crate::map::ComponentMap;

/// Safety factor applied to grid slopes.
pub const LIPSCHITZ_INFLATION: f64 = 1.1;

/// Largest finite-difference slope of `value * probability` along the
/// map's grid lines, inflated by [`LIPSCHITZ_INFLATION`].
pub fn lipschitz_estimate(map: &ComponentMap) -> f64 {
    let shape = map.shape();
    let d = shape.len();
    let mut strides = vec![1usize; d];
    for a in (0..d.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    let out: Vec<f64> = map
        .value
        .iter()
        .zip(&map.probability)
        .map(|(v, p)| v * p)
        .collect();
    let mut slope = 0.0f64;
    for flat in 0..out.len() {
        for a in 0..d {
            let i = (flat / strides[a]) % shape[a];
            if i + 1 < shape[a] {
                let dy = out[flat + strides[a]] - out[flat];
                let dx = map.axes[a][i + 1] - map.axes[a][i];
                slope = slope.max(dy.abs() / dx);
            }
        }
    }
    LIPSCHITZ_INFLATION * slope
}

/// Error propagation through the circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Sum over output ports of the bound on that port's deviation; `None`
    /// when some feedback loop has gain >= 1.
    pub bound: Option<f64>,
    /// Ids on a feedback loop whose gain is >= 1, when unbounded.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unbounded_cycle: Vec<String>,
    pub components: Vec<ComponentBudget>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentBudget {
    pub id: String,
    pub kind: ComponentKind,
    pub delta: f64,
    pub lipschitz: f64,
    /// Factor multiplying this component's error in the bound.
    pub downstream_gain: Option<f64>,
}

/// Influence structure: for each component, the components feeding it.
struct Propagation {
    ids: Vec<String>,
    kinds: Vec<ComponentKind>,
    lip: Vec<f64>,
    feeds: Vec<Vec<usize>>,
    outputs: Vec<usize>,
}

fn propagation(graph: &CircuitGraph) -> Result<Propagation> {
    let nv = graph.vertices.len();
    let mut ids = Vec::new();
    let mut kinds = Vec::new();
    let mut lip = Vec::new();
    for v in &graph.vertices {
        ids.push(v.id.clone());
        kinds.push(ComponentKind::Vertex);
        lip.push(static_lipschitz(&v.id, &v.model)?);
    }
    for e in &graph.edges {
        ids.push(e.id.clone());
        kinds.push(ComponentKind::Edge);
        lip.push(static_lipschitz(&e.id, &e.model)?);
    }
    let mut feeds = vec![Vec::new(); ids.len()];
    for (k, &(s, t)) in graph.ends.iter().enumerate() {
        feeds[nv + k].push(s);
        feeds[t].push(nv + k);
    }
    let outputs = graph
        .outputs
        .iter()
        .map(|p| graph.vertex_index(&p.vertex).expect("validated"))
        .collect();
    Ok(Propagation {
        ids,
        kinds,
        lip,
        feeds,
        outputs,
    })
}

fn static_lipschitz(id: &str, model: &ComponentModel) -> Result<f64> {
    model.map().map(lipschitz_estimate).ok_or_else(|| {
        Error::invalid(
            id,
            "live components have no static map to bound errors with",
        )
    })
}

/// Solve `E = delta + M E` with `M[c][c'] = Lip_c` when `c'` feeds `c`, by
/// fixed-point iteration from `delta`. Returns `None` when it does not
/// settle.
fn propagate(p: &Propagation, delta: &[f64]) -> Option<Vec<f64>> {
    let n = delta.len();
    let mut e = delta.to_vec();
    for _ in 0..MAX_ITERATIONS {
        let next: Vec<f64> = (0..n)
            .map(|c| delta[c] + p.lip[c] * p.feeds[c].iter().map(|&f| e[f]).sum::<f64>())
            .collect();
        if !next.iter().all(|v| v.is_finite()) {
            return None;
        }
        let change = next
            .iter()
            .zip(&e)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = next.iter().cloned().fold(0.0, f64::max);
        e = next;
        if change <= 1e-15 * scale {
            return Some(e);
        }
    }
    None
}

const MAX_ITERATIONS: usize = 200_000;

/// Components that lie on a feedback loop together with `c`.
fn loop_of(p: &Propagation, c: usize) -> Vec<usize> {
    let n = p.ids.len();
    let mut fed_by = vec![Vec::new(); n];
    for (t, sources) in p.feeds.iter().enumerate() {
        for &s in sources {
            fed_by[s].push(t);
        }
    }
    let reach = |adj: &Vec<Vec<usize>>| {
        let mut seen = vec![false; n];
        let mut stack = adj[c].clone();
        while let Some(x) = stack.pop() {
            if !std::mem::replace(&mut seen[x], true) {
                stack.extend(&adj[x]);
            }
        }
        seen
    };
    let down = reach(&fed_by);
    let up = reach(&p.feeds);
    (0..n).filter(|&x| down[x] && up[x]).collect()
}

/// A feedback loop whose gain is >= 1: the strongly connected set of
/// components on which unit errors grow without bound, in declaration
/// order. Empty when every loop gain is < 1.
fn unbounded_loop(p: &Propagation) -> Vec<String> {
    let n = p.ids.len();
    let mut done = vec![false; n];
    for c in 0..n {
        if done[c] {
            continue;
        }
        let members = loop_of(p, c);
        for &m in &members {
            done[m] = true;
        }
        if members.is_empty() {
            continue;
        }
        let inside: Vec<bool> = (0..n).map(|x| members.contains(&x)).collect();
        let restricted = Propagation {
            ids: p.ids.clone(),
            kinds: p.kinds.clone(),
            lip: p.lip.clone(),
            feeds: p
                .feeds
                .iter()
                .enumerate()
                .map(|(t, f)| {
                    if inside[t] {
                        f.iter().copied().filter(|&s| inside[s]).collect()
                    } else {
                        Vec::new()
                    }
                })
                .collect(),
            outputs: Vec::new(),
        };
        let ones: Vec<f64> = inside.iter().map(|&i| if i { 1.0 } else { 0.0 }).collect();
        if propagate(&restricted, &ones).is_none() {
            return members.into_iter().map(|m| p.ids[m].clone()).collect();
        }
    }
    Vec::new()
}

/// Bound on the summed output deviation when component `i` carries error
/// `delta_i` (given per id; missing ids count as exact): each component's
/// deviation is at most its own error plus its Lipschitz estimate times the
/// summed deviations feeding it, closed geometrically around feedback
/// loops.
pub fn error_budget(graph: &CircuitGraph, deltas: &[(String, f64)]) -> Result<ErrorBudget> {
    error_budget_with(graph, deltas, &[])
}

/// [`error_budget`] with some Lipschitz estimates replaced by given values.
pub fn error_budget_with(
    graph: &CircuitGraph,
    deltas: &[(String, f64)],
    lipschitz: &[(String, f64)],
) -> Result<ErrorBudget> {
    let mut p = propagation(graph)?;
    let position = |id: &str| {
        p.ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| Error::UnknownComponent(id.to_string()))
    };
    let mut delta = vec![0.0; p.ids.len()];
    for (id, d) in deltas {
        if !(d.is_finite() && *d >= 0.0) {
            return Err(Error::invalid(format!("delta.{id}"), "must be finite and >= 0"));
        }
        delta[position(id)?] = *d;
    }
    for (id, l) in lipschitz {
        if !(l.is_finite() && *l >= 0.0) {
            return Err(Error::invalid(format!("lipschitz.{id}"), "must be finite and >= 0"));
        }
        let c = position(id)?;
        p.lip[c] = *l;
    }
    let cycle = unbounded_loop(&p);
    let gains = if cycle.is_empty() { downstream_gains(&p) } else { None };
    let components = (0..p.ids.len())
        .map(|c| ComponentBudget {
            id: p.ids[c].clone(),
            kind: p.kinds[c],
            delta: delta[c],
            lipschitz: p.lip[c],
            downstream_gain: gains.as_ref().map(|g| g[c]),
        })
        .collect();
    let bound = gains.as_ref().map(|g| g.iter().zip(&delta).map(|(g, d)| g * d).sum());
    Ok(ErrorBudget {
        bound,
        unbounded_cycle: cycle,
        components,
    })
}

/// Bound contribution per unit error of each component.
fn downstream_gains(p: &Propagation) -> Option<Vec<f64>> {
    let n = p.ids.len();
    (0..n)
        .map(|c| {
            let mut unit = vec![0.0; n];
            unit[c] = 1.0;
            propagate(p, &unit).map(|e| p.outputs.iter().map(|&o| e[o]).sum())
        })
        .collect()
}

/// Split a global tolerance: `delta_i = delta / (k * G_i)` over the `k`
/// components that reach an output, with `G_i` the downstream gain;
/// components with no influence on the outputs get `delta`.
pub fn split_global_delta(graph: &CircuitGraph, delta: f64) -> Result<Vec<(String, f64)>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("delta", "must be finite and > 0"));
    }
    let p = propagation(graph)?;
    let cycle = unbounded_loop(&p);
    if !cycle.is_empty() {
        return Err(Error::invalid(
            "delta",
            format!("loop gain >= 1 around {cycle:?}; no finite split exists"),
        ));
    }
    let gains = downstream_gains(&p).expect("all loop gains < 1");
    let k = gains.iter().filter(|&&g| g > 0.0).count().max(1) as f64;
    Ok(p.ids
        .iter()
        .zip(&gains)
        .map(|(id, &g)| (id.clone(), if g > 0.0 { delta / (k * g) } else { delta }))
        .collect())
}
