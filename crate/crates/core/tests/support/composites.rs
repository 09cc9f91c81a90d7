//! Random chains of certified pieces (sigmoid, step, triangle wave, LIF
//! rate, synapse), each piece affinely stretched over the range of the
//! chain so far.

use aitwin_core::bio::{LifParams, SynapseParams};
use aitwin_core::rng::Stream;
use aitwin_core::smoothness::compose_maps;
use aitwin_core::{Analytic, ComponentMap, Domain, MapSource};

pub const NODES: usize = 129;

/// Pieces with their natural domains.
pub fn piece(k: usize) -> (&'static str, MapSource, f64, f64) {
    match k {
        0 => (
            "sigmoid",
            MapSource::Analytic {
                function: Analytic::Sigmoid {
                    amplitude: 1.0,
                    slope: 6.0,
                    midpoint: 0.0,
                },
            },
            -1.0,
            1.0,
        ),
        1 => (
            "step",
            MapSource::Analytic {
                function: Analytic::Heaviside {
                    at: 0.3,
                    low: 0.0,
                    high: 1.0,
                },
            },
            -1.0,
            1.0,
        ),
        2 => (
            "triangle",
            MapSource::Analytic {
                function: Analytic::Triangle { period: 1.0 },
            },
            0.0,
            3.0,
        ),
        3 => (
            "lif",
            MapSource::Lif {
                params: LifParams {
                    tau: 10.0,
                    theta: 1.0,
                    v_reset: 0.0,
                },
            },
            0.0,
            3.0,
        ),
        _ => (
            "synapse",
            MapSource::Synapse {
                params: SynapseParams {
                    amplitude: 3.0,
                    slope: 20.0,
                    midpoint: 0.12,
                    p: 1.0,
                    delay: 0,
                },
            },
            0.0,
            0.25,
        ),
    }
}

/// The piece reparametrised so that `[m, big_m]` covers its natural domain.
pub fn outer_on(source: MapSource, lo: f64, hi: f64, m: f64, big_m: f64) -> ComponentMap {
    let scale = (hi - lo) / (big_m - m);
    ComponentMap::from_source(
        MapSource::Affine {
            inner: Box::new(source),
            in_scale: scale,
            in_shift: lo - m * scale,
            out_scale: 1.0,
            out_shift: 0.0,
        },
        Domain::interval(m, big_m).unwrap(),
        &[NODES],
    )
    .unwrap()
}

/// One composition step: `outer` applied to the chain `inner`.
pub struct Composite {
    pub names: Vec<&'static str>,
    pub outer: ComponentMap,
    pub inner: ComponentMap,
}

/// `count` composition steps drawn from chains of two to four pieces.
pub fn random_composites(seed: u64, count: usize) -> Vec<Composite> {
    let mut rng = Stream::labeled(seed, "composition-corpus");
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let depth = 2 + rng.index(3);
        let (name, src, lo, hi) = piece(rng.index(5));
        let mut names = vec![name];
        let mut current = ComponentMap::from_source(src, Domain::interval(lo, hi).unwrap(), &[NODES]).unwrap();
        for _ in 1..depth {
            let (m, big_m) = current.value_range();
            if big_m - m < 1e-9 || out.len() == count {
                break;
            }
            let (name, src, lo, hi) = piece(rng.index(5));
            names.push(name);
            let outer = outer_on(src, lo, hi, m, big_m);
            let next = compose_maps(&outer, &[current.clone()]).unwrap();
            out.push(Composite {
                names: names.clone(),
                outer,
                inner: current,
            });
            current = next;
        }
    }
    out
}
