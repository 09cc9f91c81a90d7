use super::lines::{at, grid_lines, node, Line};
use super::{check_preconditions, empty_report, CheckConfig, Discontinuity, SmoothnessReport};
use crate::error::Result;
use crate::map::ComponentMap;

/// A jump on one grid line, occupying `cells` consecutive cells starting at
/// `cell`. `[lo, hi]` brackets everything flagged in those cells, with map
/// values `y_lo`/`y_hi` at its ends; `at`, `left` and `right` describe the
/// largest single step inside it.
#[derive(Clone, Debug)]
pub(crate) struct LineJump {
    pub cell: usize,
    pub cells: usize,
    pub lo: f64,
    pub hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub at: f64,
    pub left: f64,
    pub right: f64,
}

/// Search a cell for jumps: every sub-interval whose end values differ by
/// more than `tol` is halved until `depth` levels, so a cell can hold
/// several jumps and a small jump next to a large smooth change is still
/// found. Returns `(lo, hi, y(lo), y(hi))` brackets in order.
fn search_cell(
    map: &ComponentMap,
    line: &Line,
    cell: usize,
    tol: f64,
    depth: u32,
) -> Vec<(f64, f64, f64, f64)> {
    let axis = &map.axes[line.axis];
    let mut found = Vec::new();
    let mut stack = vec![(
        axis[cell],
        axis[cell + 1],
        map.value[line.flat[cell]],
        map.value[line.flat[cell + 1]],
        0u32,
    )];
    while let Some((lo, hi, ylo, yhi, level)) = stack.pop() {
        if (yhi - ylo).abs() <= tol {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        if level == depth || mid <= lo || mid >= hi {
            found.push((lo, hi, ylo, yhi));
            continue;
        }
        let ym = map.value_at(&at(map, line, mid));
        // Right half first so the left half is popped first.
        stack.push((mid, hi, ym, yhi, level + 1));
        stack.push((lo, mid, ylo, ym, level + 1));
    }
    found
}

/// Everything flagged inside one grid cell is one discontinuity: the grid
/// spacing is the finest scale at which separate jumps are told apart.
fn probed_jumps(map: &ComponentMap, line: &Line, tol: f64, depth: u32) -> Vec<LineJump> {
    let y: Vec<f64> = line.flat.iter().map(|&f| map.value[f]).collect();
    let mut out: Vec<LineJump> = Vec::new();
    for k in 0..y.len() - 1 {
        if (y[k + 1] - y[k]).abs() <= tol {
            continue;
        }
        let parts = search_cell(map, line, k, tol, depth);
        let (Some(first), Some(last)) = (parts.first(), parts.last()) else {
            continue;
        };
        let best = parts
            .iter()
            .max_by(|a, b| (a.3 - a.2).abs().total_cmp(&(b.3 - b.2).abs()))
            .expect("non-empty");
        let jump = LineJump {
            cell: k,
            cells: 1,
            lo: first.0,
            hi: last.1,
            y_lo: first.2,
            y_hi: last.3,
            at: 0.5 * (best.0 + best.1),
            left: best.2,
            right: best.3,
        };
        // A jump sitting exactly on a node shows up in both cells.
        if let Some(prev) = out.last_mut() {
            let node = map.axes[line.axis][k];
            if prev.cell + prev.cells == k
                && prev.hi == node
                && jump.lo == node
                && (prev.right - prev.left).signum() == (jump.right - jump.left).signum()
            {
                prev.cells += 1;
                prev.hi = jump.hi;
                prev.y_hi = jump.y_hi;
                prev.at = jump.lo;
                prev.right = jump.right;
                continue;
            }
        }
        out.push(jump);
    }
    out
}

/// Without off-grid access a cell is a jump when its change exceeds the
/// tolerance and twice the change of each neighbouring cell; a jump landing
/// on a node is caught as a pair of same-sign cells passing the same test.
fn sampled_jumps(map: &ComponentMap, line: &Line, tol: f64) -> Vec<LineJump> {
    let y: Vec<f64> = line.flat.iter().map(|&f| map.value[f]).collect();
    let axis = &map.axes[line.axis];
    let n = y.len() - 1;
    let d: Vec<f64> = (0..n).map(|k| y[k + 1] - y[k]).collect();
    let around = |a: usize, b: usize| {
        let before = if a > 0 { d[a - 1].abs() } else { 0.0 };
        let after = if b + 1 < n { d[b + 1].abs() } else { 0.0 };
        before.max(after)
    };
    let mut out = Vec::new();
    let mut k = 0;
    while k < n {
        if d[k].abs() > tol && d[k].abs() > 2.0 * around(k, k) {
            out.push(LineJump {
                cell: k,
                cells: 1,
                lo: axis[k],
                hi: axis[k + 1],
                y_lo: y[k],
                y_hi: y[k + 1],
                at: 0.5 * (axis[k] + axis[k + 1]),
                left: y[k],
                right: y[k + 1],
            });
            k += 1;
            continue;
        }
        if k + 1 < n && d[k] * d[k + 1] > 0.0 {
            let total = d[k] + d[k + 1];
            if total.abs() > tol
                && total.abs() > 2.0 * around(k, k + 1)
                && d[k].abs().min(d[k + 1].abs()) > 2.0 * around(k, k + 1)
            {
                out.push(LineJump {
                    cell: k,
                    cells: 2,
                    lo: axis[k],
                    hi: axis[k + 2],
                    y_lo: y[k],
                    y_hi: y[k + 2],
                    at: axis[k + 1],
                    left: y[k],
                    right: y[k + 2],
                });
                k += 2;
                continue;
            }
        }
        k += 1;
    }
    out
}

pub(crate) fn line_jumps(map: &ComponentMap, line: &Line, cfg: &CheckConfig) -> Vec<LineJump> {
    let tol = cfg.jump_tol_for(map);
    if map.has_probe() {
        probed_jumps(map, line, tol, cfg.refine_depth)
    } else {
        sampled_jumps(map, line, tol)
    }
}

/// Jumps of every grid line, paired with the line they belong to.
pub(crate) fn all_line_jumps(map: &ComponentMap, cfg: &CheckConfig) -> Vec<(Line, Vec<LineJump>)> {
    grid_lines(map)
        .into_iter()
        .map(|line| {
            let jumps = line_jumps(map, &line, cfg);
            (line, jumps)
        })
        .collect()
}

pub(crate) fn to_discontinuity(map: &ComponentMap, line: &Line, j: &LineJump) -> Discontinuity {
    let mut location = node(map, line.flat[0]);
    location[line.axis] = j.at;
    Discontinuity {
        location,
        axis: line.axis,
        left: j.left,
        right: j.right,
        jump: j.right - j.left,
    }
}

pub(crate) fn collect(map: &ComponentMap, cfg: &CheckConfig, lines: &[(Line, Vec<LineJump>)]) -> SmoothnessReport {
    let mut report = empty_report(map, cfg);
    for (line, jumps) in lines {
        for j in jumps {
            report.discontinuities.push(to_discontinuity(map, line, j));
        }
    }
    report.piecewise_continuous = report
        .discontinuities
        .iter()
        .all(|d| d.left.is_finite() && d.right.is_finite());
    report
}

/// Locate jumps along every grid line of a 1-D or 2-D map. Maps that can be
/// evaluated off-grid have each candidate cell bisected `refine_depth` times
/// and the one-sided limits are read at the final bracket; sample-only maps
/// report the candidate cell itself.
pub fn detect_discontinuities(map: &ComponentMap, cfg: &CheckConfig) -> Result<SmoothnessReport> {
    check_preconditions(map, cfg)?;
    let lines = all_line_jumps(map, cfg);
    Ok(collect(map, cfg, &lines))
}
