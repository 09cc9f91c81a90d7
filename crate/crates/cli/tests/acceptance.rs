//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (no test harness) so every line is printed even
//! when everything passes. Seeds are pinned below; each was fixed after the
//! first verified run.

#[path = "../../core/tests/support/checker.rs"]
mod checker;
#[path = "../../core/tests/support/composites.rs"]
mod composites;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use aitwin_core::approx::{
    bp_flops_per_sample, bp_gradient_check, bp_train, elm_train, train_to_tolerance, Activation, BpConfig, Dataset,
    ElmConfig, Slfn, ToleranceConfig, BP_FLOP_FORMULA,
};
use aitwin_core::bio::{simulate_hh, HhParams, HhState, LifParams, SynapseParams};
use aitwin_core::circuit::{
    composite_error, twinize, CircuitGraph, ComponentModel, DeltaBudget, Edge, InputDistribution, InputMode, Port,
    Vertex,
};
use aitwin_core::rng::Stream;
use aitwin_core::smoothness::{check_all_or_none_smoothness, verify_composition_preservation, CheckConfig};
use aitwin_core::{ComponentMap, Domain, MapSource};

/// Seed for twin training in criteria 5 and 6.
const TRAIN_SEED: u64 = 20_241_015;
/// Seed for the randomised composites of criterion 3.
const COMPOSITE_SEED: u64 = 20_241_015;
/// Seed for the Monte Carlo inputs of criterion 6.
const MONTE_CARLO_SEED: u64 = 7;
/// Seed for the random networks of criterion 4.
const GRADCHECK_SEED: u64 = 4;

const GRID: usize = 257;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let held: bool = $cond;
        if !held {
            return Err(format!($($msg)+));
        }
    };
}

fn lif_params() -> LifParams {
    LifParams {
        tau: 10.0,
        theta: 1.0,
        v_reset: 0.0,
    }
}

fn lif_map() -> ComponentMap {
    let source = MapSource::Lif { params: lif_params() };
    ComponentMap::from_source(source, Domain::interval(0.0, 3.0).unwrap(), &[GRID]).unwrap()
}

fn synapse_map() -> ComponentMap {
    let params = SynapseParams {
        amplitude: 3.0,
        slope: 20.0,
        midpoint: 0.12,
        p: 1.0,
        delay: 0,
    };
    ComponentMap::from_source(MapSource::Synapse { params }, Domain::interval(0.0, 0.25).unwrap(), &[GRID]).unwrap()
}

fn rel_std(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean.abs()
}

/// Amplitude (peak minus resting potential) of the first spike evoked from
/// rest by each current, at the default step and at the fine reference
/// step.
fn all_or_none_law() -> Verdict {
    let currents = [8.0, 10.0, 12.0, 15.0, 20.0];
    let rest = HhState::resting();
    let params = HhParams::default();
    let first_amplitude = |i: f64, dt: f64| -> Result<f64, String> {
        let run = simulate_hh(&params, rest, i, 25.0, dt, false).map_err(|e| e.to_string())?;
        run.spike_peaks
            .first()
            .map(|p| p - rest.v)
            .ok_or_else(|| format!("no spike at {i} uA/cm^2"))
    };
    let mut coarse = Vec::new();
    let mut fine = Vec::new();
    for &i in &currents {
        coarse.push(first_amplitude(i, aitwin_core::bio::DEFAULT_DT)?);
        fine.push(first_amplitude(i, 1e-4)?);
    }
    let worst = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let (sd, sd_ref) = (rel_std(&coarse), rel_std(&fine));
    ensure!(sd < 0.05 && sd_ref < 0.05, "relative std {sd:.4} (reference {sd_ref:.4})");
    ensure!(worst < 0.1, "default step differs from reference by {worst:.3} mV");
    // Sustained firing for context: later spikes ride on the relative
    // refractory period and are smaller; recorded, not asserted.
    let mut sustained = Vec::new();
    for &i in &currents {
        let run = simulate_hh(&params, rest, i, 100.0, aitwin_core::bio::DEFAULT_DT, false).unwrap();
        sustained.extend(run.spike_peaks.iter().map(|p| p - rest.v));
    }
    Ok(format!(
        "first-spike amplitudes {:?} mV, rel std {sd:.4} (dt=1e-4 reference {sd_ref:.4}, max diff {worst:.2e} mV); all spikes over 100 ms: rel std {:.4}",
        coarse.iter().map(|a| (a * 100.0).round() / 100.0).collect::<Vec<_>>(),
        rel_std(&sustained)
    ))
}

fn checker_counts() -> Verdict {
    let corpus = checker::corpus();
    let cfg = CheckConfig::default();
    let mut rows = Vec::new();
    for e in &corpus.entries {
        let r = check_all_or_none_smoothness(&e.map(corpus.points), &e.levels, &cfg).map_err(|x| x.to_string())?;
        let counts: Vec<usize> = r.levels.iter().map(|l| l.count).collect();
        let expected: Vec<usize> = e.crossings.iter().map(Vec::len).collect();
        ensure!(
            r.discontinuities.len() == e.discontinuities.len(),
            "{}: {} discontinuities, expected {}",
            e.name,
            r.discontinuities.len(),
            e.discontinuities.len()
        );
        ensure!(counts == expected, "{}: irregular counts {counts:?}, expected {expected:?}", e.name);
        rows.push(format!("{} {}/{:?}", e.name, r.discontinuities.len(), counts));
    }
    Ok(rows.join(", "))
}

fn composition_closure() -> Verdict {
    let cfg = CheckConfig::default();
    let all = composites::random_composites(COMPOSITE_SEED, 100);
    let mut jumps = 0;
    for (k, c) in all.iter().enumerate() {
        let r = verify_composition_preservation(&c.outer, std::slice::from_ref(&c.inner), &cfg).map_err(|e| e.to_string())?;
        ensure!(r.inputs_all_or_none, "#{k} {:?}: an input was not certified", c.names);
        ensure!(r.preserved, "#{k} {:?}: composite verdict false", c.names);
        jumps += r.composite.discontinuities.len();
    }
    Ok(format!("{} composites certified ({jumps} composite jumps in total)", all.len()))
}

fn random_net(rng: &mut Stream) -> (Slfn, Dataset) {
    let d = 1 + rng.index(3);
    let l = 1 + rng.index(8);
    let m = 1 + rng.index(2);
    let act = if rng.index(2) == 0 {
        Activation::Sigmoid
    } else {
        Activation::Tanh
    };
    let mut draw = |k: usize| (0..k).map(|_| rng.uniform(-1.0, 1.0)).collect::<Vec<_>>();
    let net = Slfn::new(act, d, l, m, draw(l * d), draw(l), draw(m * l), None).unwrap();
    let n = 6;
    let inputs: Vec<Vec<f64>> = (0..n).map(|_| draw(d)).collect();
    let targets: Vec<Vec<f64>> = (0..n).map(|_| draw(m)).collect();
    let domain = Domain::new(vec![-1.0; d], vec![1.0; d]).unwrap();
    (net, Dataset::new(domain, inputs, targets, None).unwrap())
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn backprop_correctness() -> Verdict {
    let mut rng = Stream::labeled(GRADCHECK_SEED, "gradcheck-nets");
    let mut worst = 0.0f64;
    for k in 0..50 {
        let (net, data) = random_net(&mut rng);
        let g = bp_gradient_check(&net, &data, 1e-6).map_err(|e| e.to_string())?;
        ensure!(g.max_deviation < 1e-6, "net {k}: relative deviation {:e}", g.max_deviation);
        worst = worst.max(g.max_deviation);
    }
    // One example, one step, written out by hand: 1 input, 2 sigmoid
    // hidden nodes, 1 linear output, deltas taken before any update.
    let (a, b, beta) = ([0.7, -1.3], [0.2, 0.5], [1.5, -0.8]);
    let (x, t, alpha) = (0.6, 0.25, 0.1);
    let net = Slfn::new(Activation::Sigmoid, 1, 2, 1, a.to_vec(), b.to_vec(), beta.to_vec(), None).unwrap();
    let data = Dataset::new(Domain::interval(-1.0, 1.0).unwrap(), vec![vec![x]], vec![vec![t]], None).unwrap();
    let (trained, _) = bp_train(&net, &data, &BpConfig { alpha, epochs: 1 }).map_err(|e| e.to_string())?;
    let h = [sigmoid(a[0] * x + b[0]), sigmoid(a[1] * x + b[1])];
    let err = t - (beta[0] * h[0] + beta[1] * h[1]);
    let mut dev = 0.0f64;
    for i in 0..2 {
        let hidden_delta = err * beta[i] * h[i] * (1.0 - h[i]);
        dev = dev
            .max((trained.beta[i] - (beta[i] + alpha * err * h[i])).abs())
            .max((trained.weights[i] - (a[i] + alpha * hidden_delta * x)).abs())
            .max((trained.biases[i] - (b[i] + alpha * hidden_delta)).abs());
    }
    ensure!(dev <= 1e-12, "single step differs from the hand oracle by {dev:e}");
    Ok(format!("50 random nets, worst relative deviation {worst:.2e}; single step within {dev:.1e} of hand oracle"))
}

fn train_to_delta() -> Verdict {
    let mut rows = Vec::new();
    for (name, map, max_hidden) in [("synapse", synapse_map(), 256), ("lif", lif_map(), 512)] {
        let start = Instant::now();
        let cfg = ToleranceConfig {
            seed: TRAIN_SEED,
            budget: max_hidden,
            ..ToleranceConfig::default()
        };
        let (_, report) = train_to_tolerance(&map, 1e-2, &cfg).map_err(|e| e.to_string())?;
        let took = start.elapsed();
        let l2 = report.heldout_l2.unwrap_or(f64::NAN);
        ensure!(report.met_tolerance == Some(true), "{name}: held-out L2 {l2:e} with L = {}", report.hidden);
        ensure!(report.hidden <= max_hidden, "{name}: L = {}", report.hidden);
        ensure!(took < Duration::from_secs(60), "{name}: took {took:?}");
        rows.push(format!("{name} L={} held-out L2 {l2:.2e} in {took:.1?}", report.hidden));
    }
    Ok(rows.join("; "))
}

fn chain_graph() -> CircuitGraph {
    let vertex = |id: &str| Vertex {
        id: id.into(),
        model: ComponentModel::Map { map: lif_map() },
    };
    CircuitGraph::new(
        vec![vertex("pre"), vertex("post")],
        vec![Edge {
            id: "syn".into(),
            source: "pre".into(),
            target: "post".into(),
            model: ComponentModel::Map { map: synapse_map() },
            delay: 1,
        }],
        vec![Port {
            port: "drive".into(),
            vertex: "pre".into(),
        }],
        vec![Port {
            port: "rate".into(),
            vertex: "post".into(),
        }],
    )
    .unwrap()
}

fn representation_at_desk_scale() -> Verdict {
    let start = Instant::now();
    let graph = chain_graph();
    let dist = InputDistribution {
        horizon: 8,
        lower: vec![0.0],
        upper: vec![3.0],
        mode: InputMode::PerStep,
    };
    let cfg = ToleranceConfig {
        seed: TRAIN_SEED,
        ..ToleranceConfig::default()
    };
    let mut measured = Vec::new();
    for delta in [1e-2, 2.5e-3] {
        let (assignment, twinned) =
            twinize(&graph, &DeltaBudget::Uniform { delta }, &cfg).map_err(|e| e.to_string())?;
        ensure!(assignment.unmet.is_empty(), "delta {delta}: unmet {:?}", assignment.unmet);
        ensure!(
            assignment.records.iter().all(|r| r.net.hidden <= 512),
            "delta {delta}: a twin needed more than 512 hidden nodes"
        );
        let e = composite_error(&graph, &twinned, &dist, 200, MONTE_CARLO_SEED).map_err(|e| e.to_string())?;
        let bound = assignment.budget.bound.ok_or("unbounded budget")?;
        ensure!(e.diverged == 0, "{} trials diverged", e.diverged);
        ensure!(e.rms <= bound * 1.05, "delta {delta}: composite {:e} > budget {bound:e} x 1.05", e.rms);
        measured.push((delta, e.rms, bound));
    }
    let ratio = measured[0].1 / measured[1].1;
    let took = start.elapsed();
    ensure!(ratio >= 2.0, "tightening delta 4x reduced the composite error only {ratio:.2}x");
    ensure!(took < Duration::from_secs(300), "took {took:?}");
    Ok(format!(
        "delta 1e-2: rms {:.2e} <= budget {:.2e}; delta 2.5e-3: rms {:.2e} <= budget {:.2e}; reduction {ratio:.2}x; {took:.1?}",
        measured[0].1, measured[0].2, measured[1].1, measured[1].2
    ))
}

fn corpus_targets() -> Vec<(String, ComponentMap)> {
    let corpus = checker::corpus();
    let mut targets: Vec<(String, ComponentMap)> =
        corpus.entries.iter().map(|e| (e.name.clone(), e.map(corpus.points))).collect();
    targets.push(("synapse".into(), synapse_map()));
    targets
}

fn elm_monotonicity() -> Verdict {
    let mut checked = 0;
    for (name, map) in corpus_targets() {
        let data = Dataset::from_map(&map);
        let mut previous = f64::INFINITY;
        for hidden in [8, 16, 32, 64, 128, 256] {
            let cfg = ElmConfig {
                hidden,
                ridge: 0.0,
                seed: TRAIN_SEED,
                ..ElmConfig::default()
            };
            let (_, report) = elm_train(&data, &cfg).map_err(|e| e.to_string())?;
            ensure!(
                report.final_l2 <= previous + 1e-12,
                "{name}: L = {hidden} error {:e} > {previous:e}",
                report.final_l2
            );
            previous = report.final_l2;
            checked += 1;
        }
    }
    Ok(format!("{checked} nested fits over {} targets, zero violations", corpus_targets().len()))
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn aitwin(args: &[&str]) -> Result<i32, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_aitwin"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    Ok(out.status.code().unwrap_or(-1))
}

/// Every file a run wrote except the timing metadata.
fn payloads(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "run_metadata.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn cli_determinism() -> Verdict {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = data_dir();
    let s = |p: PathBuf| p.to_string_lossy().into_owned();
    let (net, dataset) = random_net(&mut Stream::labeled(GRADCHECK_SEED, "cli-gradcheck"));
    std::fs::write(work.path().join("net.json"), net.to_json_string().unwrap()).unwrap();
    std::fs::write(work.path().join("data.json"), serde_json::to_string(&dataset).unwrap()).unwrap();
    let graph = s(data.join("graphs/chain.json"));
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("map-lif", vec!["map".into(), s(data.join("components/lif_simulated.json")), "--grid".into(), "16".into()]),
        ("map-hh", vec!["map".into(), s(data.join("components/hh.json")), "--grid".into(), "16".into()]),
        ("check", vec!["check".into(), s(data.join("maps/lif.json"))]),
        ("train-elm", vec!["train".into(), s(data.join("maps/synapse.json")), "--delta".into(), "1e-2".into()]),
        (
            "train-bp",
            vec![
                "train".into(),
                s(data.join("maps/synapse.json")),
                "--method".into(),
                "bp".into(),
                "--budget".into(),
                "64".into(),
            ],
        ),
        ("twinize", vec!["twinize".into(), graph.clone(), "--delta".into(), "1e-2".into()]),
        ("verify", vec!["verify".into(), graph.clone(), graph.clone(), "--trials".into(), "20".into()]),
        (
            "gradcheck",
            vec!["gradcheck".into(), s(work.path().join("net.json")), s(work.path().join("data.json"))],
        ),
    ];
    let mut compared = 0;
    for (name, args) in &commands {
        let mut runs = Vec::new();
        for round in 0..2 {
            let out = work.path().join(format!("{name}-{round}"));
            let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
            let out_s = s(out.clone());
            full.extend(["--seed", "11", "--out", &out_s]);
            let code = aitwin(&full)?;
            ensure!(code == 0 || code == 3, "{name}: exit code {code}");
            runs.push((code, payloads(&out)));
        }
        ensure!(!runs[0].1.is_empty(), "{name}: no reports written");
        ensure!(runs[0] == runs[1], "{name}: reports differ between identical runs");
        compared += runs[0].1.len();
    }
    Ok(format!("{} commands run twice, {compared} report files byte-identical", commands.len()))
}

fn energy_accounting() -> Verdict {
    let map = synapse_map();
    let data = Dataset::from_map(&map);
    let (hidden, epochs) = (16, 200);
    let (weights, biases) = aitwin_core::approx::draw_hidden(TRAIN_SEED, 1, hidden, 1.0);
    let start = Slfn::new(
        Activation::Sigmoid,
        1,
        hidden,
        1,
        weights,
        biases,
        vec![0.0; hidden],
        Some(map.domain.clone()),
    )
    .unwrap();
    let (_, bp) = bp_train(&start, &data, &BpConfig { alpha: 0.05, epochs }).map_err(|e| e.to_string())?;
    let steps = (epochs * data.len()) as u64;
    let formula = steps * bp_flops_per_sample(1, hidden, 1);
    let diff = bp.flop_count.abs_diff(formula);
    ensure!(diff <= steps, "bp flop_count {} vs formula {formula}", bp.flop_count);
    // Smallest ELM reaching the same training error.
    let mut elm_row = None;
    for l in 1..=256 {
        let (_, r) = elm_train(&data, &ElmConfig { hidden: l, seed: TRAIN_SEED, ..ElmConfig::default() })
            .map_err(|e| e.to_string())?;
        if r.final_l2 <= bp.final_l2 {
            elm_row = Some((l, r.final_l2, r.flop_count));
            break;
        }
    }
    let (l, elm_err, elm_flops) = elm_row.ok_or("no ELM up to 256 nodes matched the BP error")?;
    Ok(format!(
        "bp flop_count {} = formula `{BP_FLOP_FORMULA}` ({diff} off); at training L2 {:.3e}: BP (L={hidden}, {epochs} epochs) {} flops vs ELM (L={l}, L2 {elm_err:.3e}) {elm_flops} flops, ratio {:.1}",
        bp.flop_count,
        bp.final_l2,
        bp.flop_count,
        bp.flop_count as f64 / elm_flops as f64
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("all-or-none law", all_or_none_law),
        ("checker counts on the analytic corpus", checker_counts),
        ("composition closure", composition_closure),
        ("backpropagation correctness", backprop_correctness),
        ("train to delta = 1e-2", train_to_delta),
        ("circuit twin at desk scale", representation_at_desk_scale),
        ("ELM monotonicity", elm_monotonicity),
        ("CLI determinism", cli_determinism),
        ("energy accounting", energy_accounting),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        match verdict {
            Ok(detail) => println!("criterion {} PASS {name} ({took:.1?}): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name} ({took:.1?}): {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
