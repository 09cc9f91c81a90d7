//! JSON graph files. Maps and twin networks are either inline objects or
//! paths relative to the graph file's directory (`.csv` paths are read as
//! map CSV, anything else as JSON).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::graph::{CircuitGraph, ComponentModel, Edge, LiveLif, Port, Vertex};
use crate::approx::Slfn;
use crate::error::{Error, Result};
use crate::map::{ComponentMap, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapRef {
    Path(String),
    Inline(Box<ComponentMap>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NetRef {
    Path(String),
    Inline(Box<Slfn>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub live_lif: Option<LiveLif>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twin: Option<NetRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub source: String,
    pub target: String,
    pub map: MapRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twin: Option<NetRef>,
    #[serde(default)]
    pub delay: usize,
}

/// On-disk form of a [`CircuitGraph`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub schema_version: u32,
    pub vertices: Vec<VertexSpec>,
    #[serde(default)]
    pub edges: Vec<EdgeSpec>,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
}

struct Resolver<'a> {
    base: Option<&'a Path>,
}

impl Resolver<'_> {
    fn path(&self, id: &str, p: &str) -> Result<PathBuf> {
        match self.base {
            Some(b) => Ok(b.join(p)),
            None => Err(Error::invalid(
                id.to_string(),
                format!("file reference `{p}` needs a graph file location"),
            )),
        }
    }

    fn map(&self, id: &str, r: &MapRef) -> Result<ComponentMap> {
        match r {
            MapRef::Inline(m) => {
                m.validate()?;
                Ok((**m).clone())
            }
            MapRef::Path(p) => {
                let path = self.path(id, p)?;
                let text = std::fs::read_to_string(&path)?;
                if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                    ComponentMap::from_csv_str(&text)
                } else {
                    ComponentMap::from_json_str(&text)
                }
            }
        }
    }

    fn net(&self, id: &str, r: &NetRef) -> Result<Slfn> {
        match r {
            NetRef::Inline(n) => {
                n.validate_structure()?;
                Ok((**n).clone())
            }
            NetRef::Path(p) => {
                let text = std::fs::read_to_string(self.path(id, p)?)?;
                let net: Slfn = serde_json::from_str(&text)?;
                net.validate_structure()?;
                Ok(net)
            }
        }
    }

    fn model(&self, id: &str, map: Option<&MapRef>, live: Option<&LiveLif>, twin: Option<&NetRef>) -> Result<ComponentModel> {
        match (map, live, twin) {
            (Some(m), None, None) => Ok(ComponentModel::Map { map: self.map(id, m)? }),
            (Some(m), None, Some(t)) => Ok(ComponentModel::Twin {
                net: self.net(id, t)?,
                original: self.map(id, m)?,
            }),
            (None, Some(l), None) => Ok(ComponentModel::LiveLif { lif: l.clone() }),
            _ => Err(Error::invalid(
                id,
                "give exactly one of `map` (optionally with `twin`) or `live_lif`",
            )),
        }
    }
}

impl GraphFile {
    /// Build the graph, reading referenced files relative to `base`.
    pub fn resolve(&self, base: Option<&Path>) -> Result<CircuitGraph> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        let r = Resolver { base };
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                Ok(Vertex {
                    id: v.id.clone(),
                    model: r.model(&v.id, v.map.as_ref(), v.live_lif.as_ref(), v.twin.as_ref())?,
                })
            })
            .collect::<Result<_>>()?;
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    id: e.id.clone(),
                    source: e.source.clone(),
                    target: e.target.clone(),
                    model: r.model(&e.id, Some(&e.map), None, e.twin.as_ref())?,
                    delay: e.delay,
                })
            })
            .collect::<Result<_>>()?;
        CircuitGraph::new(vertices, edges, self.inputs.clone(), self.outputs.clone())
    }

    /// Self-contained file with every map and network inline.
    pub fn inline(graph: &CircuitGraph) -> Self {
        let parts = |m: &ComponentModel| match m {
            ComponentModel::Map { map } => (Some(MapRef::Inline(Box::new(map.clone()))), None, None),
            ComponentModel::Twin { net, original } => (
                Some(MapRef::Inline(Box::new(original.clone()))),
                None,
                Some(NetRef::Inline(Box::new(net.clone()))),
            ),
            ComponentModel::LiveLif { lif } => (None, Some(lif.clone()), None),
        };
        GraphFile {
            schema_version: SCHEMA_VERSION,
            vertices: graph
                .vertices
                .iter()
                .map(|v| {
                    let (map, live_lif, twin) = parts(&v.model);
                    VertexSpec {
                        id: v.id.clone(),
                        map,
                        live_lif,
                        twin,
                    }
                })
                .collect(),
            edges: graph
                .edges
                .iter()
                .map(|e| {
                    let (map, _, twin) = parts(&e.model);
                    EdgeSpec {
                        id: e.id.clone(),
                        source: e.source.clone(),
                        target: e.target.clone(),
                        map: map.expect("edges carry static maps"),
                        twin,
                        delay: e.delay,
                    }
                })
                .collect(),
            inputs: graph.inputs.clone(),
            outputs: graph.outputs.clone(),
        }
    }
}

impl CircuitGraph {
    /// Parse a graph whose maps and networks are all inline.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(s)?;
        file.resolve(None)
    }

    /// Read a graph file, resolving references next to it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: GraphFile = serde_json::from_str(&text)?;
        file.resolve(Some(path.parent().unwrap_or(Path::new("."))))
    }

    /// Self-contained JSON with every map and network inline.
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GraphFile::inline(self))?)
    }
}
