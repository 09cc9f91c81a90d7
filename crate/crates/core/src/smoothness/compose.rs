use serde::{Deserialize, Serialize};

use super::detect::{all_line_jumps, LineJump};
use super::lines::{at, Line};
use super::{check_map, CheckConfig, SmoothnessReport};
use crate::error::{Error, Result};
use crate::map::{ComponentMap, MapSource, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub schema_version: u32,
    pub outer: SmoothnessReport,
    pub inners: Vec<SmoothnessReport>,
    pub composite: SmoothnessReport,
    /// Sum of the inner maps' discontinuity counts, recounted at the
    /// composite tolerance divided by twice the outer map's largest slope
    /// when that is finer than their own tolerance.
    pub inner_discontinuities: usize,
    /// Composite jumps not at an inner jump whose bracket's image under
    /// the inner maps meets one of the outer map's jumps.
    pub outer_mapped: usize,
    /// Composite jumps explained by neither.
    pub unexplained: usize,
    /// Every composite jump is explained and the composite count is at
    /// most `inner_discontinuities + outer_mapped`.
    pub count_bound_holds: bool,
    pub inputs_all_or_none: bool,
    pub composite_all_or_none: bool,
    /// Both checks passed (the verdict check holds vacuously when some
    /// input is not all-or-none).
    pub preserved: bool,
}

/// Outer jumps with their bracket along the jump axis.
struct OuterJump {
    axis: usize,
    lo: f64,
    hi: f64,
    location: Vec<f64>,
}

fn outer_jumps(outer: &ComponentMap, cfg: &CheckConfig) -> Vec<OuterJump> {
    all_line_jumps(outer, cfg)
        .into_iter()
        .flat_map(|(line, jumps): (Line, Vec<LineJump>)| {
            let base = at(outer, &line, 0.0);
            jumps.into_iter().map(move |j| {
                let mut location = base.clone();
                location[line.axis] = 0.5 * (j.lo + j.hi);
                OuterJump {
                    axis: line.axis,
                    lo: j.lo,
                    hi: j.hi,
                    location,
                }
            })
        })
        .collect()
}

/// Largest finite-difference slope of the outer map over grid cells that
/// are not jumps.
fn outer_slope(outer: &ComponentMap, cfg: &CheckConfig) -> f64 {
    let mut slope = 0.0f64;
    for (line, jumps) in all_line_jumps(outer, cfg) {
        let xs = &outer.axes[line.axis];
        for k in 0..xs.len() - 1 {
            if jumps.iter().any(|j| k >= j.cell && k < j.cell + j.cells) {
                continue;
            }
            let dy = outer.value[line.flat[k + 1]] - outer.value[line.flat[k]];
            slope = slope.max(dy.abs() / (xs[k + 1] - xs[k]));
        }
    }
    slope
}

/// `outer(inner_1, ..., inner_k)` sampled on the inners' common grid;
/// off-grid values come from evaluating the parts.
pub fn compose_maps(outer: &ComponentMap, inners: &[ComponentMap]) -> Result<ComponentMap> {
    let first = inners
        .first()
        .ok_or_else(|| Error::invalid("inners", "need at least one inner map"))?;
    if outer.dim() != inners.len() {
        return Err(Error::Dimension {
            what: "outer inputs vs inner maps".into(),
            expected: outer.dim(),
            got: inners.len(),
        });
    }
    for (i, m) in inners.iter().enumerate().skip(1) {
        if m.domain != first.domain || m.axes != first.axes {
            return Err(Error::Domain(format!(
                "inner 0 and inner {i} are sampled on different grids"
            )));
        }
    }
    let source = MapSource::Compose {
        outer: Box::new(outer.clone()),
        inners: inners.to_vec(),
    };
    let nodes = first.nodes();
    let n = nodes.len();
    let map = ComponentMap {
        schema_version: SCHEMA_VERSION,
        domain: first.domain.clone(),
        axes: first.axes.clone(),
        value: nodes.iter().map(|x| source.value(x)).collect(),
        probability: vec![1.0; n],
        delay: vec![0.0; n],
        weights: first.weights.clone(),
        source: Some(source),
    };
    map.validate()?;
    Ok(map)
}

/// Whether the inner image of `[lo, hi]` on `line` meets an outer jump.
fn meets_outer_jump(
    inners: &[ComponentMap],
    composite: &ComponentMap,
    line: &Line,
    (lo, hi): (f64, f64),
    jumps: &[OuterJump],
    cell_width: &[f64],
) -> bool {
    let ua: Vec<f64> = inners.iter().map(|m| m.value_at(&at(composite, line, lo))).collect();
    let ub: Vec<f64> = inners.iter().map(|m| m.value_at(&at(composite, line, hi))).collect();
    jumps.iter().any(|j| {
        (0..inners.len()).all(|i| {
            let (a, b) = (ua[i].min(ub[i]), ua[i].max(ub[i]));
            if i == j.axis {
                let w = j.hi - j.lo;
                a - w <= j.hi && b + w >= j.lo
            } else {
                a - cell_width[i] <= j.location[i] && b + cell_width[i] >= j.location[i]
            }
        })
    })
}

/// Build `outer(inner_1, ..., inner_k)` on the inners' common grid and
/// check that each of its jumps sits at an inner jump or maps onto an
/// outer jump, and that it stays all-or-none when every part is.
pub fn verify_composition_preservation(
    outer: &ComponentMap,
    inners: &[ComponentMap],
    cfg: &CheckConfig,
) -> Result<CompositionReport> {
    let composite_map = compose_maps(outer, inners)?;
    for (i, m) in inners.iter().enumerate() {
        let (lo, hi) = m.value_range();
        let (olo, ohi) = (outer.domain.lower[i], outer.domain.upper[i]);
        let slack = 1e-9 * (ohi - olo);
        if lo < olo - slack || hi > ohi + slack {
            return Err(Error::Domain(format!(
                "inner {i} range [{lo}, {hi}] is outside outer axis {i} [{olo}, {ohi}]"
            )));
        }
    }
    let outer_report = check_map(outer, cfg)?;
    let inner_reports: Vec<SmoothnessReport> =
        inners.iter().map(|m| check_map(m, cfg)).collect::<Result<_>>()?;
    let composite = check_map(&composite_map, cfg)?;

    // Away from the outer map's jumps a composite jump needs an inner jump
    // of at least the composite tolerance over the outer slope, so the
    // inner maps are recounted at that transported tolerance.
    let slope = 2.0 * outer_slope(outer, cfg);
    let composite_tol = cfg.jump_tol_for(&composite_map);
    let inner_lines: Vec<_> = inners
        .iter()
        .map(|m| {
            let own = cfg.jump_tol_for(m);
            let tol = if slope > 0.0 { own.min(composite_tol / slope) } else { own };
            let recount = CheckConfig {
                jump_tol: Some(tol),
                ..cfg.clone()
            };
            all_line_jumps(m, &recount)
        })
        .collect();
    let inner_discontinuities: usize = inner_lines
        .iter()
        .flat_map(|lines| lines.iter().map(|(_, j)| j.len()))
        .sum();

    let jumps = outer_jumps(outer, cfg);
    let cell_width: Vec<f64> = outer
        .axes
        .iter()
        .map(|a| a.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max))
        .collect();
    let mut outer_mapped = 0;
    let mut unexplained = 0;
    for (li, (line, cjumps)) in all_line_jumps(&composite_map, cfg).iter().enumerate() {
        for cj in cjumps {
            let w = cj.hi - cj.lo;
            let at_inner_jump = inner_lines.iter().any(|lines| {
                lines[li]
                    .1
                    .iter()
                    .any(|ij| ij.lo <= cj.hi + w && ij.hi >= cj.lo - w)
            });
            if at_inner_jump {
                continue;
            }
            if meets_outer_jump(inners, &composite_map, line, (cj.lo, cj.hi), &jumps, &cell_width) {
                outer_mapped += 1;
            } else {
                unexplained += 1;
            }
        }
    }
    let count_bound_holds =
        unexplained == 0 && composite.discontinuities.len() <= inner_discontinuities + outer_mapped;
    let certified = |r: &SmoothnessReport| r.all_or_none == Some(true) && r.piecewise_continuous;
    let inputs_all_or_none = certified(&outer_report) && inner_reports.iter().all(certified);
    let composite_all_or_none = certified(&composite);
    Ok(CompositionReport {
        schema_version: SCHEMA_VERSION,
        preserved: count_bound_holds && (!inputs_all_or_none || composite_all_or_none),
        outer: outer_report,
        inners: inner_reports,
        composite,
        inner_discontinuities,
        outer_mapped,
        unexplained,
        count_bound_holds,
        inputs_all_or_none,
        composite_all_or_none,
    })
}
