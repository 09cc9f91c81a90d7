use serde::{Deserialize, Serialize};

use super::graph::{CircuitGraph, ComponentModel};
use crate::error::{Error, Result};
use crate::map::{ComponentMap, Domain};
use crate::rng::{derive_seed, Stream};

/// How edges use their release probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Release {
    /// Edge output is scaled by the probability (expected value).
    #[default]
    Expected,
    /// Edge output passes whole with the given probability, else zero;
    /// draws come from a per-edge stream derived from `seed`.
    Bernoulli { seed: u64 },
}

/// Port series and per-vertex traces of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// One series per output port, in port order.
    pub outputs: Vec<Vec<f64>>,
    /// One series per vertex, in vertex order.
    pub traces: Vec<Vec<f64>>,
}

/// Synchronous discrete-time run for `steps` steps. `inputs` holds one
/// series per input port (in port order), each at least `steps` long.
/// Signals before step 0 are zero. Every step visits vertices in an order
/// compatible with zero-delay edges, so nothing ever reads a value that is
/// not yet final and signals only travel along edge direction.
pub fn evaluate(graph: &CircuitGraph, inputs: &[Vec<f64>], steps: usize) -> Result<Evaluation> {
    evaluate_with(graph, inputs, steps, Release::Expected)
}

pub fn evaluate_with(
    graph: &CircuitGraph,
    inputs: &[Vec<f64>],
    steps: usize,
    release: Release,
) -> Result<Evaluation> {
    if inputs.len() != graph.inputs.len() {
        return Err(Error::Dimension {
            what: "input series".into(),
            expected: graph.inputs.len(),
            got: inputs.len(),
        });
    }
    for (p, series) in graph.inputs.iter().zip(inputs) {
        if series.len() < steps {
            return Err(Error::invalid(
                format!("inputs.{}", p.port),
                format!("series has {} steps, need {steps}", series.len()),
            ));
        }
    }
    let nv = graph.vertices.len();
    let port_vertex: Vec<usize> = graph
        .inputs
        .iter()
        .map(|p| graph.vertex_index(&p.vertex).expect("validated"))
        .collect();
    let mut external = vec![Vec::new(); nv];
    for (k, &v) in port_vertex.iter().enumerate() {
        external[v].push(k);
    }
    let mut streams: Vec<Option<Stream>> = graph
        .edges
        .iter()
        .map(|e| match release {
            Release::Expected => None,
            Release::Bernoulli { seed } => Some(Stream::labeled(derive_seed(seed, &e.id), "release")),
        })
        .collect();
    let mut traces = vec![vec![0.0; steps]; nv];
    let mut membrane: Vec<f64> = graph
        .vertices
        .iter()
        .map(|v| match &v.model {
            ComponentModel::LiveLif { lif } => lif.params.v_reset,
            _ => 0.0,
        })
        .collect();
    for t in 0..steps {
        for &v in &graph.order {
            let mut x: f64 = external[v].iter().map(|&k| inputs[k][t]).sum();
            for &k in &graph.incoming[v] {
                let edge = &graph.edges[k];
                let (src, _) = graph.ends[k];
                let y = if t >= edge.delay {
                    traces[src][t - edge.delay]
                } else {
                    0.0
                };
                let s = edge.model.value(y);
                let p = edge.model.probability(y);
                x += match &mut streams[k] {
                    None => s * p,
                    Some(stream) => {
                        if stream.bernoulli(p) {
                            s
                        } else {
                            0.0
                        }
                    }
                };
            }
            let out = match &graph.vertices[v].model {
                ComponentModel::LiveLif { lif } => {
                    if !x.is_finite() {
                        f64::NAN
                    } else {
                        lif.advance(&mut membrane[v], x) as f64 / lif.step_ms
                    }
                }
                model => model.value(x),
            };
            if !out.is_finite() || !x.is_finite() {
                return Err(Error::Divergence {
                    step: t,
                    what: format!("vertex `{}`", graph.vertices[v].id),
                });
            }
            traces[v][t] = out;
        }
    }
    let outputs = graph
        .outputs
        .iter()
        .map(|p| traces[graph.vertex_index(&p.vertex).expect("validated")].clone())
        .collect();
    Ok(Evaluation { outputs, traces })
}

/// Static input-to-output map: hold input port `port` at each grid value
/// (other ports at `rest`), run `settle` steps and read output port
/// `output` at the last step.
pub fn static_map(
    graph: &CircuitGraph,
    port: usize,
    output: usize,
    domain: (f64, f64),
    points: usize,
    rest: &[f64],
    settle: usize,
) -> Result<ComponentMap> {
    if port >= graph.inputs.len() || output >= graph.outputs.len() {
        return Err(Error::invalid("port", "no such port"));
    }
    if rest.len() != graph.inputs.len() {
        return Err(Error::Dimension {
            what: "resting inputs".into(),
            expected: graph.inputs.len(),
            got: rest.len(),
        });
    }
    if settle == 0 {
        return Err(Error::invalid("settle", "must be >= 1"));
    }
    let dom = Domain::interval(domain.0, domain.1)?;
    let axis = crate::map::uniform_axis(domain.0, domain.1, points)?;
    let mut value = Vec::with_capacity(points);
    for &u in &axis {
        let series: Vec<Vec<f64>> = rest
            .iter()
            .enumerate()
            .map(|(k, &r)| vec![if k == port { u } else { r }; settle])
            .collect();
        let run = evaluate(graph, &series, settle)?;
        value.push(run.outputs[output][settle - 1]);
    }
    ComponentMap::from_samples(dom, vec![axis], value, None, None)
}
