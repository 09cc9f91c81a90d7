use serde::{Deserialize, Serialize};

use crate::map::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Elm,
    Bp,
}

/// Formula for `flop_count` of [`super::bp_train`] with `n` samples, `d`
/// inputs, `L` hidden nodes and `m` outputs, per epoch. Each multiply-add,
/// multiply, add/subtract and activation (or derivative) evaluation counts
/// once; the unit-box input scaling is done once up front and not counted.
pub const BP_FLOP_FORMULA: &str = "epochs * n * (2*L*(d+1) + 4*L + 3*m*L + 2*m)";

/// Formula for `flop_count` of [`super::elm_train`]: hidden-layer build and
/// row weighting plus the dense solve estimate.
pub const ELM_FLOP_FORMULA: &str = "n*L*(d+3) + n*m + [ridge>0: n*L^2 + n*L*m + L + floor(L^3/3) + 2*L^2*m | ridge=0: 4*n*L^2 + 22*L^3 + 2*n*L*m]";

pub fn bp_flops_per_sample(d: usize, hidden: usize, m: usize) -> u64 {
    let (d, l, m) = (d as u64, hidden as u64, m as u64);
    2 * l * (d + 1) + 4 * l + 3 * m * l + 2 * m
}

/// Outcome of one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub schema_version: u32,
    pub method: Method,
    pub seed: Option<u64>,
    pub hidden: usize,
    /// Discrete L2(X) error on the training samples.
    pub final_l2: f64,
    /// Discrete L2(X) error on the held-out grid, when one was used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heldout_l2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    pub rank_deficient: bool,
    pub diverged: bool,
    /// Set by tolerance-driven training.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub met_tolerance: Option<bool>,
    pub flop_count: u64,
    pub flop_formula: String,
    /// `(hidden, epochs, held-out error)` for every candidate tried.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<(usize, usize, f64)>,
    pub config: serde_json::Value,
}

impl TrainReport {
    pub(crate) fn new(method: Method, hidden: usize) -> Self {
        TrainReport {
            schema_version: SCHEMA_VERSION,
            method,
            seed: None,
            hidden,
            final_l2: 0.0,
            heldout_l2: None,
            epochs: None,
            rank_deficient: false,
            diverged: false,
            met_tolerance: None,
            flop_count: 0,
            flop_formula: match method {
                Method::Elm => ELM_FLOP_FORMULA.into(),
                Method::Bp => BP_FLOP_FORMULA.into(),
            },
            history: Vec::new(),
            config: serde_json::Value::Null,
        }
    }
}
