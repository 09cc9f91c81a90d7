//! Grid-scale certification of piecewise continuity and all-or-none
//! smoothness, and empirical checks that composition preserves both.
//!
//! Multi-dimensional maps (1-D and 2-D only) are certified by scanning every
//! grid line along every axis.

mod compose;
mod detect;
mod irregular;
mod lines;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::map::{ComponentMap, SCHEMA_VERSION};

pub use compose::{compose_maps, verify_composition_preservation, CompositionReport};
pub use detect::detect_discontinuities;
pub use irregular::{check_all_or_none_smoothness, find_irregular_points, LevelScan};

/// Minimum number of grid nodes along every axis of a checked map.
pub const MIN_GRID_POINTS: usize = 16;

/// Default relative jump tolerance (times the value-channel range).
pub const DEFAULT_RELATIVE_JUMP_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    /// Smallest jump treated as a discontinuity; `None` means
    /// [`DEFAULT_RELATIVE_JUMP_TOL`] times the value range.
    pub jump_tol: Option<f64>,
    /// Bisection levels used to localise a jump inside its grid cell (only
    /// for maps that can be evaluated off-grid).
    pub refine_depth: u32,
    /// Levels `c` to test; empty means ten interior levels at
    /// `min + (2k + 1) / 20 * range`.
    pub levels: Vec<f64>,
    /// Neighbourhood radius: a set where the map equals `c` whose
    /// half-width reaches this radius has no witnesses on both sides and is
    /// reported as a plateau. `None` disables this test.
    pub neighborhood: Option<f64>,
    /// Samples within `margin * range` of `c` count as attaining `c`.
    pub margin: f64,
    /// Runs of samples at `c` spanning more than this many cells are
    /// plateaus (indeterminate) rather than points.
    pub plateau_cells: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            jump_tol: None,
            refine_depth: 20,
            levels: Vec::new(),
            neighborhood: None,
            margin: 1e-12,
            plateau_cells: 2,
        }
    }
}

impl CheckConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.jump_tol {
            ensure_finite("jump_tol", t)?;
            if t <= 0.0 {
                return Err(Error::invalid("jump_tol", "must be > 0"));
            }
        }
        if self.refine_depth == 0 {
            return Err(Error::invalid("refine_depth", "must be >= 1"));
        }
        if let Some(d) = self.neighborhood {
            ensure_finite("neighborhood", d)?;
            if d <= 0.0 {
                return Err(Error::invalid("neighborhood", "must be > 0"));
            }
        }
        ensure_finite("margin", self.margin)?;
        if self.margin < 0.0 {
            return Err(Error::invalid("margin", "must be >= 0"));
        }
        for (i, &c) in self.levels.iter().enumerate() {
            ensure_finite(&format!("levels[{i}]"), c)?;
        }
        Ok(())
    }

    /// Jump tolerance for a given map.
    pub fn jump_tol_for(&self, map: &ComponentMap) -> f64 {
        self.jump_tol.unwrap_or_else(|| {
            let (lo, hi) = map.value_range();
            let t = DEFAULT_RELATIVE_JUMP_TOL * (hi - lo);
            if t > 0.0 {
                t
            } else {
                f64::MIN_POSITIVE
            }
        })
    }

    /// Levels to test on a given map.
    pub fn levels_for(&self, map: &ComponentMap) -> Vec<f64> {
        if !self.levels.is_empty() {
            return self.levels.clone();
        }
        let (lo, hi) = map.value_range();
        if hi <= lo {
            return Vec::new();
        }
        (0..10)
            .map(|k| lo + (2 * k + 1) as f64 / 20.0 * (hi - lo))
            .collect()
    }
}

/// A located jump. `axis` is the scan direction it was found along.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discontinuity {
    pub location: Vec<f64>,
    pub axis: usize,
    pub left: f64,
    pub right: f64,
    /// `right - left`.
    pub jump: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrregularPoint {
    pub location: Vec<f64>,
    pub level: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelStatus {
    /// Finite count of irregular points.
    Finite,
    /// The level is attained on a plateau the grid cannot resolve.
    Plateau,
    /// The level lies outside the open value range and was not tested.
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: f64,
    pub status: LevelStatus,
    pub count: usize,
}

/// Settings actually used, echoed into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub jump_tol: f64,
    pub refine_depth: u32,
    pub neighborhood: Option<f64>,
    pub margin: f64,
    pub plateau_cells: usize,
    pub grid: Vec<usize>,
    pub probed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub schema_version: u32,
    pub discontinuities: Vec<Discontinuity>,
    pub irregular_points: Vec<IrregularPoint>,
    pub levels: Vec<LevelResult>,
    pub piecewise_continuous: bool,
    /// `None` until levels have been checked.
    pub all_or_none: Option<bool>,
    pub config: ConfigEcho,
}

impl SmoothnessReport {
    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per discontinuity, irregular point and level verdict.
    pub fn to_csv_summary(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "location", "axis", "level", "left", "right", "jump", "count", "status"])?;
        let loc = |x: &[f64]| {
            x.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(";")
        };
        for d in &self.discontinuities {
            w.write_record([
                "discontinuity".to_string(),
                loc(&d.location),
                d.axis.to_string(),
                String::new(),
                d.left.to_string(),
                d.right.to_string(),
                d.jump.to_string(),
                String::new(),
                String::new(),
            ])?;
        }
        for p in &self.irregular_points {
            w.write_record([
                "irregular".to_string(),
                loc(&p.location),
                String::new(),
                p.level.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ])?;
        }
        for l in &self.levels {
            let status = serde_json::to_value(l.status)?;
            w.write_record([
                "level".to_string(),
                String::new(),
                String::new(),
                l.level.to_string(),
                String::new(),
                String::new(),
                String::new(),
                l.count.to_string(),
                status.as_str().unwrap_or_default().to_string(),
            ])?;
        }
        w.write_record([
            "verdict".to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            format!(
                "piecewise_continuous={} all_or_none={}",
                self.piecewise_continuous,
                self.all_or_none.map_or("unchecked".into(), |v| v.to_string())
            ),
        ])?;
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
    }
}

/// Discontinuity scan followed by the all-or-none check on the configured
/// levels.
pub fn check_map(map: &ComponentMap, cfg: &CheckConfig) -> Result<SmoothnessReport> {
    let levels = cfg.levels_for(map);
    check_all_or_none_smoothness(map, &levels, cfg)
}

/// Shape and resolution requirements shared by all checks.
pub(crate) fn check_preconditions(map: &ComponentMap, cfg: &CheckConfig) -> Result<()> {
    cfg.validate()?;
    map.validate()?;
    let d = map.dim();
    if !(1..=2).contains(&d) {
        return Err(Error::invalid(
            "map",
            format!("only 1-D and 2-D maps can be checked, got {d}-D"),
        ));
    }
    for (i, a) in map.axes.iter().enumerate() {
        if a.len() < MIN_GRID_POINTS {
            return Err(Error::invalid(
                "map",
                format!(
                    "axis {i} has {} nodes, need at least {MIN_GRID_POINTS}",
                    a.len()
                ),
            ));
        }
    }
    Ok(())
}

pub(crate) fn echo(map: &ComponentMap, cfg: &CheckConfig) -> ConfigEcho {
    ConfigEcho {
        jump_tol: cfg.jump_tol_for(map),
        refine_depth: cfg.refine_depth,
        neighborhood: cfg.neighborhood,
        margin: cfg.margin,
        plateau_cells: cfg.plateau_cells,
        grid: map.shape(),
        probed: map.has_probe(),
    }
}

pub(crate) fn empty_report(map: &ComponentMap, cfg: &CheckConfig) -> SmoothnessReport {
    SmoothnessReport {
        schema_version: SCHEMA_VERSION,
        discontinuities: Vec::new(),
        irregular_points: Vec::new(),
        levels: Vec::new(),
        piecewise_continuous: true,
        all_or_none: None,
        config: echo(map, cfg),
    }
}
