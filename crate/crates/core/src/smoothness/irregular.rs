use serde::{Deserialize, Serialize};

use super::detect::{all_line_jumps, collect, LineJump};
use super::lines::{node, Line};
use super::{check_preconditions, CheckConfig, IrregularPoint, LevelResult, LevelStatus, SmoothnessReport};
use crate::error::{ensure_finite, Error, Result};
use crate::map::ComponentMap;

/// Irregular points found for one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelScan {
    pub level: f64,
    pub locations: Vec<Vec<f64>>,
    /// The level is attained on a run of samples too wide to call a point.
    pub plateau: bool,
}

fn sign(y: f64, c: f64, margin: f64) -> i8 {
    if (y - c).abs() <= margin {
        0
    } else if y > c {
        1
    } else {
        -1
    }
}

fn lerp_root(x0: f64, y0: f64, x1: f64, y1: f64, c: f64) -> f64 {
    x0 + (c - y0) / (y1 - y0) * (x1 - x0)
}

struct LineScan {
    points: Vec<f64>,
    plateau: bool,
}

/// Crossings of `c` inside the continuous piece of nodes `s..=e`.
#[allow(clippy::too_many_arguments)]
fn scan_piece(xs: &[f64], ys: &[f64], s: usize, e: usize, c: f64, margin: f64, cfg: &CheckConfig, out: &mut LineScan) {
    let sg: Vec<i8> = ys.iter().map(|&y| sign(y, c, margin)).collect();
    let mut k = s;
    while k <= e {
        if sg[k] == 0 {
            let a = k;
            let mut b = k;
            while b < e && sg[b + 1] == 0 {
                b += 1;
            }
            let prev = if a > s { sg[a - 1] } else { 0 };
            let next = if b < e { sg[b + 1] } else { 0 };
            // Touching the level without crossing, or a run reaching the end
            // of the piece, does not produce an irregular point.
            if prev != 0 && next != 0 && prev != next {
                let half_width = 0.5 * (xs[b] - xs[a]);
                let too_wide = b - a > cfg.plateau_cells
                    || cfg.neighborhood.is_some_and(|d| half_width >= d);
                if too_wide {
                    out.plateau = true;
                } else {
                    out.points.push(0.5 * (xs[a] + xs[b]));
                }
            }
            k = b + 1;
        } else {
            if k < e && sg[k + 1] != 0 && sg[k + 1] != sg[k] {
                out.points.push(lerp_root(xs[k], ys[k], xs[k + 1], ys[k + 1], c));
            }
            k += 1;
        }
    }
}

fn stretch_crossing(a: (f64, f64), b: (f64, f64), c: f64, margin: f64, out: &mut LineScan) {
    let (s0, s1) = (sign(a.1, c, margin), sign(b.1, c, margin));
    if s0 != 0 && s1 != 0 && s0 != s1 && b.0 > a.0 {
        out.points.push(lerp_root(a.0, a.1, b.0, b.1, c));
    }
}

fn scan_line(map: &ComponentMap, line: &Line, jumps: &[LineJump], c: f64, margin: f64, cfg: &CheckConfig) -> LineScan {
    let xs = &map.axes[line.axis];
    let ys: Vec<f64> = line.flat.iter().map(|&f| map.value[f]).collect();
    let mut out = LineScan {
        points: Vec::new(),
        plateau: false,
    };
    let mut start = 0;
    let mut i = 0;
    while i < jumps.len() {
        // Jumps sharing cells form one excluded span.
        let first = jumps[i].cell;
        let mut end = first + jumps[i].cells;
        let mut j = i + 1;
        while j < jumps.len() && jumps[j].cell < end {
            end = end.max(jumps[j].cell + jumps[j].cells);
            j += 1;
        }
        scan_piece(xs, &ys, start, first, c, margin, cfg, &mut out);
        // Continuous stretches between the localised jumps.
        let mut cur = (xs[first], ys[first]);
        for jump in &jumps[i..j] {
            stretch_crossing(cur, (jump.lo, jump.y_lo), c, margin, &mut out);
            cur = (jump.hi, jump.y_hi);
        }
        stretch_crossing(cur, (xs[end], ys[end]), c, margin, &mut out);
        start = end;
        i = j;
    }
    scan_piece(xs, &ys, start, ys.len() - 1, c, margin, cfg, &mut out);
    out.points.sort_by(f64::total_cmp);
    out
}

fn check_level(map: &ComponentMap, c: f64) -> Result<()> {
    ensure_finite("level", c)?;
    let (lo, hi) = map.value_range();
    if !(c > lo && c < hi) {
        return Err(Error::invalid(
            "level",
            format!("{c} is not inside the open value range ({lo}, {hi})"),
        ));
    }
    Ok(())
}

fn scan_level(map: &ComponentMap, lines: &[(Line, Vec<LineJump>)], c: f64, cfg: &CheckConfig) -> LevelScan {
    let (lo, hi) = map.value_range();
    let margin = cfg.margin * (hi - lo);
    let mut scan = LevelScan {
        level: c,
        locations: Vec::new(),
        plateau: false,
    };
    for (line, jumps) in lines {
        let r = scan_line(map, line, jumps, c, margin, cfg);
        scan.plateau |= r.plateau;
        let base = node(map, line.flat[0]);
        for t in r.points {
            let mut x = base.clone();
            x[line.axis] = t;
            scan.locations.push(x);
        }
    }
    scan
}

/// Points where the map crosses level `c` strictly, located by linear
/// interpolation between samples. Domain endpoints never count, nor do
/// points where the map touches `c` without crossing.
pub fn find_irregular_points(map: &ComponentMap, c: f64, cfg: &CheckConfig) -> Result<LevelScan> {
    check_preconditions(map, cfg)?;
    check_level(map, c)?;
    let lines = all_line_jumps(map, cfg);
    Ok(scan_level(map, &lines, c, cfg))
}

/// Discontinuities plus irregular points for every level. Levels outside
/// the open value range are recorded as rejected and skipped; the verdict
/// fails only if some level hits a plateau.
pub fn check_all_or_none_smoothness(
    map: &ComponentMap,
    levels: &[f64],
    cfg: &CheckConfig,
) -> Result<SmoothnessReport> {
    check_preconditions(map, cfg)?;
    let lines = all_line_jumps(map, cfg);
    let mut report = collect(map, cfg, &lines);
    let mut verdict = true;
    for &c in levels {
        if check_level(map, c).is_err() {
            ensure_finite("level", c)?;
            report.levels.push(LevelResult {
                level: c,
                status: LevelStatus::Rejected,
                count: 0,
            });
            continue;
        }
        let scan = scan_level(map, &lines, c, cfg);
        verdict &= !scan.plateau;
        report.levels.push(LevelResult {
            level: c,
            status: if scan.plateau {
                LevelStatus::Plateau
            } else {
                LevelStatus::Finite
            },
            count: scan.locations.len(),
        });
        report
            .irregular_points
            .extend(scan.locations.into_iter().map(|location| IrregularPoint { location, level: c }));
    }
    report.all_or_none = Some(verdict);
    Ok(report)
}
