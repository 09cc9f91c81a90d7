use std::f64::consts::PI;

use aitwin_core::bio::{LifParams, SynapseParams};
use aitwin_core::smoothness::{
    check_all_or_none_smoothness, detect_discontinuities, find_irregular_points,
    verify_composition_preservation, CheckConfig, LevelStatus,
};
use aitwin_core::{Analytic, ComponentMap, Domain, MapSource};

fn cfg() -> CheckConfig {
    CheckConfig::default()
}

fn heaviside(n: usize) -> ComponentMap {
    ComponentMap::analytic(
        Analytic::Heaviside {
            at: 0.0,
            low: 0.0,
            high: 1.0,
        },
        -1.0,
        1.0,
        n,
    )
    .unwrap()
}

fn lif_map(n: usize) -> ComponentMap {
    ComponentMap::from_source(
        MapSource::Lif {
            params: LifParams {
                tau: 10.0,
                theta: 1.0,
                v_reset: 0.0,
            },
        },
        Domain::interval(0.0, 3.0).unwrap(),
        &[n],
    )
    .unwrap()
}

fn sampled(map: &ComponentMap) -> ComponentMap {
    ComponentMap {
        source: None,
        ..map.clone()
    }
}

#[test]
fn sine_has_no_discontinuities() {
    let m = ComponentMap::analytic(Analytic::Sin { freq: 1.0 }, -1.0, 1.0, 101).unwrap();
    let c = CheckConfig {
        jump_tol: Some(0.1),
        ..cfg()
    };
    let r = detect_discontinuities(&m, &c).unwrap();
    assert!(r.discontinuities.is_empty());
    assert!(r.piecewise_continuous);
    let r = detect_discontinuities(&sampled(&m), &c).unwrap();
    assert!(r.discontinuities.is_empty());
}

#[test]
fn heaviside_has_one_localised_jump() {
    for n in [16, 64, 101, 257] {
        let m = heaviside(n);
        let width = 2.0 / (n - 1) as f64;
        let r = detect_discontinuities(&m, &cfg()).unwrap();
        assert_eq!(r.discontinuities.len(), 1, "n = {n}");
        let d = &r.discontinuities[0];
        assert!(d.location[0].abs() <= width * 0.5f64.powi(20) * 2.0, "n = {n}");
        assert!((d.jump - 1.0).abs() < 1e-12);
        let r = detect_discontinuities(&sampled(&m), &cfg()).unwrap();
        assert_eq!(r.discontinuities.len(), 1, "sampled n = {n}");
        assert!(r.discontinuities[0].location[0].abs() <= width);
    }
}

#[test]
fn lif_curve_has_one_jump_at_threshold() {
    for n in [64, 256] {
        let m = lif_map(n);
        let width = 3.0 / (n - 1) as f64;
        for map in [m.clone(), sampled(&m)] {
            let r = detect_discontinuities(&map, &cfg()).unwrap();
            assert_eq!(r.discontinuities.len(), 1, "n = {n}");
            assert!((r.discontinuities[0].location[0] - 1.0).abs() <= width);
            assert_eq!(r.discontinuities[0].left, 0.0);
        }
    }
}

#[test]
fn coarse_grids_are_rejected() {
    let m = ComponentMap::analytic(Analytic::Identity, 0.0, 1.0, 15).unwrap();
    assert!(detect_discontinuities(&m, &cfg()).is_err());
}

#[test]
fn identity_crosses_zero_once() {
    let m = ComponentMap::analytic(Analytic::Identity, -1.0, 1.0, 101).unwrap();
    let s = find_irregular_points(&m, 0.0, &cfg()).unwrap();
    assert_eq!(s.locations.len(), 1);
    assert!(s.locations[0][0].abs() < 1e-12);
    // Even grid: the crossing falls between nodes.
    let m = ComponentMap::analytic(Analytic::Identity, -1.0, 1.0, 100).unwrap();
    let s = find_irregular_points(&m, 0.0, &cfg()).unwrap();
    assert_eq!(s.locations.len(), 1);
    assert!(s.locations[0][0].abs() < 1e-12);
}

#[test]
fn square_levels() {
    let m = ComponentMap::analytic(Analytic::Square, -1.0, 1.0, 201).unwrap();
    assert!(find_irregular_points(&m, 0.0, &cfg()).is_err());
    let s = find_irregular_points(&m, 0.25, &cfg()).unwrap();
    assert_eq!(s.locations.len(), 2);
    assert!((s.locations[0][0] + 0.5).abs() < 1e-12);
    assert!((s.locations[1][0] - 0.5).abs() < 1e-12);
}

#[test]
fn heaviside_skips_the_middle_level() {
    for m in [heaviside(64), sampled(&heaviside(64)), heaviside(65), sampled(&heaviside(65))] {
        let s = find_irregular_points(&m, 0.5, &cfg()).unwrap();
        assert!(s.locations.is_empty());
        assert!(!s.plateau);
    }
}

#[test]
fn sine_levels_on_full_period() {
    // Roots of sin(x) = c in the open interval (-pi, pi): two each for
    // c = +-0.5 and one (x = 0) for c = 0, the roots at +-pi being domain
    // endpoints.
    let m = ComponentMap::from_source(
        MapSource::Analytic {
            function: Analytic::Sin { freq: 1.0 },
        },
        Domain::interval(-PI, PI).unwrap(),
        &[401],
    )
    .unwrap();
    let r = check_all_or_none_smoothness(&m, &[-0.5, 0.0, 0.5], &cfg()).unwrap();
    assert_eq!(r.all_or_none, Some(true));
    let counts: Vec<usize> = r.levels.iter().map(|l| l.count).collect();
    assert_eq!(counts, vec![2, 1, 2]);
    let roots: Vec<f64> = r.irregular_points.iter().map(|p| p.location[0]).collect();
    let expect = [-5.0 * PI / 6.0, -PI / 6.0, 0.0, PI / 6.0, 5.0 * PI / 6.0];
    for (a, b) in roots.iter().zip(expect) {
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
    }
}

#[test]
fn constant_map_is_vacuously_all_or_none() {
    let m = ComponentMap::analytic(Analytic::Constant { value: 2.0 }, 0.0, 1.0, 32).unwrap();
    let r = check_all_or_none_smoothness(&m, &[1.0, 2.0, 3.0], &cfg()).unwrap();
    assert_eq!(r.all_or_none, Some(true));
    assert!(r.levels.iter().all(|l| l.status == LevelStatus::Rejected));
    assert!(r.irregular_points.is_empty());
}

#[test]
fn triangle_wave_three_periods() {
    let m = ComponentMap::analytic(Analytic::Triangle { period: 1.0 }, 0.0, 3.0, 301).unwrap();
    let r = check_all_or_none_smoothness(&m, &[0.0], &cfg()).unwrap();
    assert_eq!(r.levels[0].count, 6);
    assert!(r.discontinuities.is_empty());
}

#[test]
fn plateau_at_level_is_indeterminate() {
    // Ramp up to 0.5, stay there for 8 cells, ramp up again.
    let v: Vec<f64> = (0..40)
        .map(|k| match k {
            0..=10 => 0.05 * k as f64,
            11..=18 => 0.5,
            _ => 0.5 + 0.05 * (k - 18) as f64,
        })
        .collect();
    let axis: Vec<f64> = (0..40).map(|k| k as f64 / 39.0).collect();
    let m = ComponentMap::from_samples(Domain::interval(0.0, 1.0).unwrap(), vec![axis], v, None, None).unwrap();
    let r = check_all_or_none_smoothness(&m, &[0.5, 0.7], &cfg()).unwrap();
    assert_eq!(r.levels[0].status, LevelStatus::Plateau);
    assert_eq!(r.levels[1].status, LevelStatus::Finite);
    assert_eq!(r.all_or_none, Some(false));
}

#[test]
fn touching_without_crossing_is_not_irregular() {
    // 1 - x^2 on [-1, 1]: level 1 is the maximum, so test x^2 shifted so
    // that a local minimum touches the level inside the range.
    let axis: Vec<f64> = (0..41).map(|k| -1.0 + k as f64 / 20.0).collect();
    let v: Vec<f64> = axis
        .iter()
        .map(|&x| if x < 0.0 { x * x } else { (2.0 * x).min(1.5) })
        .collect();
    let m = ComponentMap::from_samples(Domain::interval(-1.0, 1.0).unwrap(), vec![axis], v, None, None).unwrap();
    // Level 0 is the minimum, so touch at a level inside the range needs
    // another shape; here check that the crossing count for 0.25 is 2.
    let s = find_irregular_points(&m, 0.25, &cfg()).unwrap();
    assert_eq!(s.locations.len(), 2);
    let axis: Vec<f64> = (0..41).map(|k| k as f64 / 40.0).collect();
    let v: Vec<f64> = axis
        .iter()
        .map(|&x| 0.5 + (x - 0.5) * (x - 0.5) + if x > 0.8 { -0.5 } else { 0.0 })
        .collect();
    let m = ComponentMap::from_samples(Domain::interval(0.0, 1.0).unwrap(), vec![axis], v, None, None).unwrap();
    let s = find_irregular_points(&m, 0.5, &cfg()).unwrap();
    // The touch at x = 0.5 does not count; the drop at 0.8 is a jump and
    // the level is skipped there.
    assert!(s.locations.is_empty(), "{:?}", s.locations);
}

#[test]
fn two_dimensional_scans() {
    let m = ComponentMap::from_source(
        MapSource::Analytic {
            function: Analytic::WeightedSum {
                weights: vec![1.0, 0.0],
            },
        },
        Domain::new(vec![-1.0, 0.0], vec![1.0, 1.0]).unwrap(),
        &[21, 16],
    )
    .unwrap();
    let r = check_all_or_none_smoothness(&m, &[0.05], &cfg()).unwrap();
    assert!(r.discontinuities.is_empty());
    assert_eq!(r.levels[0].count, 16);
    assert_eq!(r.all_or_none, Some(true));
}

#[test]
fn negation_symmetry() {
    let m = ComponentMap::analytic(Analytic::Sin { freq: 3.0 }, -2.0, 2.0, 200).unwrap();
    let neg = ComponentMap {
        value: m.value.iter().map(|v| -v).collect(),
        source: None,
        ..m.clone()
    };
    let pos = sampled(&m);
    for c in [-0.7, -0.2, 0.0, 0.4] {
        let a = find_irregular_points(&pos, c, &cfg()).unwrap();
        let b = find_irregular_points(&neg, -c, &cfg()).unwrap();
        assert_eq!(a.locations, b.locations);
    }
}

#[test]
fn composition_sigmoid_of_step() {
    let outer = ComponentMap::analytic(
        Analytic::Sigmoid {
            amplitude: 1.0,
            slope: 4.0,
            midpoint: 0.5,
        },
        0.0,
        1.0,
        64,
    )
    .unwrap();
    let r = verify_composition_preservation(&outer, &[heaviside(101)], &cfg()).unwrap();
    assert_eq!(r.composite.discontinuities.len(), 1);
    assert!(r.preserved);
}

#[test]
fn composition_identity_outer_reproduces_inner() {
    let inner = ComponentMap::analytic(Analytic::Sin { freq: 2.0 }, -1.0, 1.0, 101).unwrap();
    let outer = ComponentMap::analytic(Analytic::Identity, -1.0, 1.0, 64).unwrap();
    let r = verify_composition_preservation(&outer, std::slice::from_ref(&inner), &cfg()).unwrap();
    assert_eq!(r.composite.discontinuities, r.inners[0].discontinuities);
    assert_eq!(r.composite.irregular_points, r.inners[0].irregular_points);
    assert_eq!(r.composite.levels, r.inners[0].levels);
    assert!(r.preserved);
}

#[test]
fn composition_lif_of_synapse_jumps_at_preimage() {
    // Synapse 3 / (1 + exp(-20 (x - 0.12))) equals theta = 1 where
    // exp(-20 (x - 0.12)) = 2, i.e. x = 0.12 - ln 2 / 20.
    let syn = ComponentMap::from_source(
        MapSource::Synapse {
            params: SynapseParams {
                amplitude: 3.0,
                slope: 20.0,
                midpoint: 0.12,
                p: 1.0,
                delay: 0,
            },
        },
        Domain::interval(0.0, 0.25).unwrap(),
        &[129],
    )
    .unwrap();
    let (lo, hi) = syn.value_range();
    let outer = ComponentMap::from_source(
        MapSource::Lif {
            params: LifParams {
                tau: 10.0,
                theta: 1.0,
                v_reset: 0.0,
            },
        },
        Domain::interval(lo, hi).unwrap(),
        &[256],
    )
    .unwrap();
    let r = verify_composition_preservation(&outer, &[syn], &cfg()).unwrap();
    assert_eq!(r.composite.discontinuities.len(), 1);
    let x = 0.12 - 2f64.ln() / 20.0;
    assert!((r.composite.discontinuities[0].location[0] - x).abs() < 1e-6);
    assert!(r.preserved);
}

#[test]
fn composition_range_mismatch_names_inner() {
    let inner = ComponentMap::analytic(Analytic::Linear { gain: 2.0, offset: 0.0 }, 0.0, 1.0, 32).unwrap();
    let outer = ComponentMap::analytic(Analytic::Identity, 0.0, 1.0, 32).unwrap();
    let e = verify_composition_preservation(&outer, &[inner], &cfg()).unwrap_err();
    assert!(e.to_string().contains("inner 0"), "{e}");
}

#[test]
fn reports_serialise() {
    let r = check_all_or_none_smoothness(&heaviside(64), &[0.3], &cfg()).unwrap();
    let json = r.to_json_string().unwrap();
    assert!(json.contains("\"discontinuities\""));
    let csv = r.to_csv_summary().unwrap();
    assert!(csv.lines().next().unwrap().starts_with("kind,location"));
    assert!(csv.contains("discontinuity,"));
}
