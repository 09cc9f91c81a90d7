//! Analytic checker corpus with hand-derived jump and crossing locations,
//! read from `data/checker_corpus.json`.

use serde::Deserialize;

use aitwin_core::{ComponentMap, Domain, MapSource};

const TABLE: &str = include_str!("../../../../data/checker_corpus.json");

#[derive(Deserialize)]
pub struct Corpus {
    pub points: usize,
    pub entries: Vec<Entry>,
}

#[derive(Deserialize)]
pub struct Entry {
    pub name: String,
    pub source: MapSource,
    pub domain: [f64; 2],
    /// Jump locations.
    pub discontinuities: Vec<f64>,
    pub levels: Vec<f64>,
    /// Irregular-point locations per level.
    pub crossings: Vec<Vec<f64>>,
    #[allow(dead_code)]
    pub derivation: String,
}

impl Entry {
    pub fn map(&self, points: usize) -> ComponentMap {
        let domain = Domain::interval(self.domain[0], self.domain[1]).unwrap();
        ComponentMap::from_source(self.source.clone(), domain, &[points]).unwrap()
    }
}

pub fn corpus() -> Corpus {
    serde_json::from_str(TABLE).expect("checker corpus table parses")
}
