use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use aitwin_core::approx::{bp_gradient_check, Dataset, Method, Slfn, ToleranceConfig, train_to_tolerance};
use aitwin_core::bio::ComponentFile;
use aitwin_core::circuit::{
    composite_error, error_budget, sup_error, twinize as twinize_graph, CircuitGraph, ComponentModel, DeltaBudget,
    InputDistribution, InputMode,
};
use aitwin_core::smoothness::{check_map, CheckConfig};
use aitwin_core::ComponentMap;

use crate::output::{read, read_config, CmdResult, Failure, Output, Status};
use crate::Common;

fn load_map(path: &Path) -> Result<ComponentMap, Failure> {
    let text = read(path)?;
    let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let map = if csv {
        ComponentMap::from_csv_str(&text)
    } else {
        ComponentMap::from_json_str(&text)
    };
    map.map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<CircuitGraph, Failure> {
    CircuitGraph::load(path).map_err(|e| {
        let status = Failure::from(e);
        Failure {
            status: status.status,
            error: format!("{}: {}", path.display(), status.error),
        }
    })
}

pub fn map(common: &Common, component: &Path, grid: usize) -> CmdResult {
    let file = ComponentFile::from_json_str(&read(component)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", component.display())))?;
    let (map, excluded) = file.build_map(grid)?;
    let mut out = Output::new(&common.out, "map")?;
    out.text("map.json", &(map.to_json_string()? + "\n"))?;
    out.text("map.csv", &map.to_csv_string()?)?;
    let (lo, hi) = map.value_range();
    out.report(
        "map_report.json",
        common.seed,
        json!({ "component": component, "grid": grid, "file": file }),
        &json!({ "points": map.len(), "value_range": [lo, hi], "excluded": excluded }),
    )?;
    let summary = format!("map: {} points, {} excluded", map.len(), excluded.len());
    out.finish(Status::Ok, summary)
}

pub fn check(common: &Common, path: &Path) -> CmdResult {
    let map = load_map(path)?;
    let cfg: CheckConfig = read_config(common.config.as_deref())?;
    let report = check_map(&map, &cfg)?;
    let mut out = Output::new(&common.out, "check")?;
    out.report(
        "smoothness_report.json",
        common.seed,
        json!({ "map": path, "check": cfg }),
        &report,
    )?;
    out.text("smoothness_summary.csv", &report.to_csv_summary()?)?;
    let summary = format!(
        "check: {} discontinuities, {} irregular points, piecewise_continuous={}, all_or_none={}",
        report.discontinuities.len(),
        report.irregular_points.len(),
        report.piecewise_continuous,
        report.all_or_none.map_or("unchecked".into(), |v| v.to_string()),
    );
    out.finish(Status::Ok, summary)
}

fn tolerance_config(base: ToleranceConfig, seed: u64, method: Option<Method>, budget: Option<usize>) -> ToleranceConfig {
    ToleranceConfig {
        seed,
        method: method.unwrap_or(base.method),
        budget: budget.unwrap_or(base.budget),
        ..base
    }
}

pub fn train(common: &Common, path: &Path, delta: f64, method: Option<Method>, budget: Option<usize>) -> CmdResult {
    let map = load_map(path)?;
    let base: ToleranceConfig = read_config(common.config.as_deref())?;
    let cfg = tolerance_config(base, common.seed, method, budget);
    let (net, report) = train_to_tolerance(&map, delta, &cfg)?;
    let mut out = Output::new(&common.out, "train")?;
    out.text("net.json", &(net.to_json_string()? + "\n"))?;
    out.report(
        "train_report.json",
        common.seed,
        json!({ "map": path, "delta": delta, "tolerance": cfg }),
        &report,
    )?;
    let status = if report.diverged {
        Status::Diverged
    } else if report.met_tolerance == Some(true) {
        Status::Ok
    } else {
        Status::Unmet
    };
    let summary = format!(
        "train: {:?} L={} held-out L2 {:.3e} (delta {delta:e}) met={}",
        report.method,
        report.hidden,
        report.heldout_l2.unwrap_or(report.final_l2),
        report.met_tolerance == Some(true)
    );
    out.finish(status, summary)
}

/// Settings file for `twinize`.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TwinizeConfig {
    tolerance: ToleranceConfig,
    delta_budget: Option<DeltaBudget>,
}

pub fn twinize(
    common: &Common,
    path: &Path,
    delta: Option<f64>,
    global: bool,
    method: Option<Method>,
    budget: Option<usize>,
) -> CmdResult {
    let graph = load_graph(path)?;
    let file: TwinizeConfig = read_config(common.config.as_deref())?;
    let cfg = tolerance_config(file.tolerance, common.seed, method, budget);
    let deltas = match (delta, file.delta_budget) {
        (Some(d), _) if global => DeltaBudget::Global { delta: d },
        (Some(d), _) => DeltaBudget::Uniform { delta: d },
        (None, _) if global => return Err(Failure::invalid("--global needs --delta")),
        (None, Some(b)) => b,
        (None, None) => DeltaBudget::Uniform { delta: 1e-2 },
    };
    let (assignment, twinned) = twinize_graph(&graph, &deltas, &cfg)?;
    let mut out = Output::new(&common.out, "twinize")?;
    out.report(
        "twin_assignment.json",
        common.seed,
        json!({ "graph": path, "delta_budget": deltas, "tolerance": cfg }),
        &assignment,
    )?;
    out.text("twinned_graph.json", &(twinned.to_json_string()? + "\n"))?;
    let status = if assignment.unmet.is_empty() {
        Status::Ok
    } else {
        Status::Unmet
    };
    let summary = format!(
        "twinize: {} twins, unmet {:?}, budget {}",
        assignment.records.len(),
        assignment.unmet,
        assignment
            .budget
            .bound
            .map_or("unbounded".to_string(), |b| format!("{b:.3e}"))
    );
    out.finish(status, summary)
}

/// Settings file for `verify`.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct VerifyConfig {
    inputs: Option<InputDistribution>,
}

/// Default input law: a fresh uniform draw every step over the domain of
/// each input vertex's map, for eight steps.
fn default_inputs(graph: &CircuitGraph) -> Result<InputDistribution, Failure> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for p in &graph.inputs {
        let map = graph.model(&p.vertex).and_then(ComponentModel::map).ok_or_else(|| {
            Failure::invalid(format!(
                "input port `{}` feeds a live vertex; give an input distribution in --config",
                p.port
            ))
        })?;
        lower.push(map.domain.lower[0]);
        upper.push(map.domain.upper[0]);
    }
    Ok(InputDistribution {
        horizon: 8,
        lower,
        upper,
        mode: InputMode::PerStep,
    })
}

pub fn verify(common: &Common, original: &Path, twinned: &Path, trials: usize, delta: Option<f64>) -> CmdResult {
    let a = load_graph(original)?;
    let b = load_graph(twinned)?;
    let file: VerifyConfig = read_config(common.config.as_deref())?;
    let dist = match file.inputs {
        Some(d) => d,
        None => default_inputs(&a)?,
    };
    let estimate = composite_error(&a, &b, &dist, trials, common.seed)?;
    // Budget from the twins' measured errors, when the twinned graph has
    // the same components.
    let deltas: Vec<(String, f64)> = b
        .vertices
        .iter()
        .map(|v| (&v.id, &v.model))
        .chain(b.edges.iter().map(|e| (&e.id, &e.model)))
        .filter_map(|(id, m)| match m {
            ComponentModel::Twin { net, original } => Some((id.clone(), sup_error(net, original))),
            _ => None,
        })
        .collect();
    let budget = if a.component_ids() == b.component_ids() {
        Some(error_budget(&a, &deltas)?)
    } else {
        None
    };
    let mut out = Output::new(&common.out, "verify")?;
    out.report(
        "verify_report.json",
        common.seed,
        json!({ "original": original, "twinned": twinned, "trials": trials, "delta": delta, "inputs": dist }),
        &json!({ "composite": estimate, "budget": budget }),
    )?;
    let status = if estimate.diverged == trials {
        Status::Diverged
    } else if delta.is_some_and(|d| estimate.rms.is_nan() || estimate.rms > d) {
        Status::Unmet
    } else {
        Status::Ok
    };
    let summary = format!(
        "verify: rms deviation {:.3e} over {} trials ({} diverged), budget {}",
        estimate.rms,
        trials,
        estimate.diverged,
        budget
            .and_then(|b| b.bound)
            .map_or("n/a".to_string(), |b| format!("{b:.3e}"))
    );
    out.finish(status, summary)
}

/// Settings file for `gradcheck`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GradcheckConfig {
    h: f64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        GradcheckConfig { h: 1e-6 }
    }
}

pub fn gradcheck(common: &Common, net_path: &Path, data_path: &Path, delta: f64) -> CmdResult {
    // Any activation may be checked, including the unrestricted ones.
    let net: Slfn = serde_json::from_str(&read(net_path)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", net_path.display())))?;
    net.validate_structure()?;
    let data = Dataset::from_json_str(&read(data_path)?)
        .map_err(|e| Failure::invalid(format!("{}: {e}", data_path.display())))?;
    let cfg: GradcheckConfig = read_config(common.config.as_deref())?;
    let check = bp_gradient_check(&net, &data, cfg.h)?;
    let mut out = Output::new(&common.out, "gradcheck")?;
    out.report(
        "gradcheck_report.json",
        common.seed,
        json!({ "net": net_path, "dataset": data_path, "h": cfg.h, "delta": delta }),
        &check,
    )?;
    let status = if check.max_deviation <= delta {
        Status::Ok
    } else {
        Status::Unmet
    };
    let summary = format!(
        "gradcheck: {} parameters, max relative deviation {:e}",
        check.analytic.len(),
        check.max_deviation
    );
    out.finish(status, summary)
}
