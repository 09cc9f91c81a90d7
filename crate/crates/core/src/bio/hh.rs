//! Hodgkin–Huxley membrane with the classic squid-axon kinetics, integrated
//! by fixed-step RK4.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Default integration step (ms).
pub const DEFAULT_DT: f64 = 0.01;
/// Spike detection threshold (mV).
pub const SPIKE_THRESHOLD: f64 = 0.0;
/// Lockout after a detected spike (ms).
pub const REFRACTORY_MS: f64 = 2.0;

/// Membrane constants. Units: µF/cm², mS/cm², mV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HhParams {
    pub c_m: f64,
    pub g_na: f64,
    pub g_k: f64,
    pub g_leak: f64,
    pub e_na: f64,
    pub e_k: f64,
    pub e_leak: f64,
}

impl Default for HhParams {
    /// Classic constants in the modern (rest ≈ -65 mV) convention.
    fn default() -> Self {
        HhParams {
            c_m: 1.0,
            g_na: 120.0,
            g_k: 36.0,
            g_leak: 0.3,
            e_na: 50.0,
            e_k: -77.0,
            e_leak: -54.387,
        }
    }
}

impl HhParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_m", self.c_m),
            ("g_na", self.g_na),
            ("g_k", self.g_k),
            ("g_leak", self.g_leak),
            ("e_na", self.e_na),
            ("e_k", self.e_k),
            ("e_leak", self.e_leak),
        ] {
            ensure_finite(name, v)?;
        }
        if self.c_m <= 0.0 {
            return Err(Error::invalid("c_m", "must be > 0"));
        }
        for (name, g) in [("g_na", self.g_na), ("g_k", self.g_k), ("g_leak", self.g_leak)] {
            if g < 0.0 {
                return Err(Error::invalid(name, "conductance must be >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HhState {
    pub v: f64,
    pub m: f64,
    pub h: f64,
    pub n: f64,
}

impl HhState {
    /// V = -65 mV with every gate at its steady state.
    pub fn resting() -> Self {
        let v = -65.0;
        let ss = |(a, b): (f64, f64)| a / (a + b);
        HhState {
            v,
            m: ss(rates_m(v)),
            h: ss(rates_h(v)),
            n: ss(rates_n(v)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v", self.v), ("m", self.m), ("h", self.h), ("n", self.n)] {
            ensure_finite(name, v)?;
        }
        for (name, g) in [("m", self.m), ("h", self.h), ("n", self.n)] {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::invalid(name, "gating variable outside [0, 1]"));
            }
        }
        Ok(())
    }

    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.m.is_finite() && self.h.is_finite() && self.n.is_finite()
    }
}

/// `x / (1 - exp(-x / k))` with its removable singularity at 0 filled in.
fn vtrap(x: f64, k: f64) -> f64 {
    let r = x / k;
    if r.abs() < 1e-7 {
        k * (1.0 + 0.5 * r)
    } else {
        x / (1.0 - (-r).exp())
    }
}

fn rates_m(v: f64) -> (f64, f64) {
    (0.1 * vtrap(v + 40.0, 10.0), 4.0 * (-(v + 65.0) / 18.0).exp())
}

fn rates_h(v: f64) -> (f64, f64) {
    (
        0.07 * (-(v + 65.0) / 20.0).exp(),
        1.0 / (1.0 + (-(v + 35.0) / 10.0).exp()),
    )
}

fn rates_n(v: f64) -> (f64, f64) {
    (0.01 * vtrap(v + 55.0, 10.0), 0.125 * (-(v + 65.0) / 80.0).exp())
}

fn derivative(s: &HhState, p: &HhParams, i_ext: f64) -> [f64; 4] {
    let i_ion = p.g_na * s.m.powi(3) * s.h * (s.v - p.e_na)
        + p.g_k * s.n.powi(4) * (s.v - p.e_k)
        + p.g_leak * (s.v - p.e_leak);
    let gate = |(a, b): (f64, f64), x: f64| a * (1.0 - x) - b * x;
    [
        (i_ext - i_ion) / p.c_m,
        gate(rates_m(s.v), s.m),
        gate(rates_h(s.v), s.h),
        gate(rates_n(s.v), s.n),
    ]
}

fn offset(s: &HhState, k: &[f64; 4], f: f64) -> HhState {
    HhState {
        v: s.v + f * k[0],
        m: s.m + f * k[1],
        h: s.h + f * k[2],
        n: s.n + f * k[3],
    }
}

/// Advance one RK4 step of `dt` ms under constant current density `i_ext`
/// (µA/cm²). Gates are clamped to `[0, 1]` afterwards.
pub fn hh_step(state: &HhState, params: &HhParams, i_ext: f64, dt: f64) -> Result<HhState> {
    state.validate()?;
    params.validate()?;
    ensure_finite("i_ext", i_ext)?;
    ensure_finite("dt", dt)?;
    if dt < 0.0 {
        return Err(Error::invalid("dt", "must be >= 0"));
    }
    Ok(rk4(state, params, i_ext, dt))
}

fn rk4(s: &HhState, p: &HhParams, i_ext: f64, dt: f64) -> HhState {
    if dt == 0.0 {
        return *s;
    }
    let k1 = derivative(s, p, i_ext);
    let k2 = derivative(&offset(s, &k1, 0.5 * dt), p, i_ext);
    let k3 = derivative(&offset(s, &k2, 0.5 * dt), p, i_ext);
    let k4 = derivative(&offset(s, &k3, dt), p, i_ext);
    let inc = |i: usize| dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    HhState {
        v: s.v + inc(0),
        m: (s.m + inc(1)).clamp(0.0, 1.0),
        h: (s.h + inc(2)).clamp(0.0, 1.0),
        n: (s.n + inc(3)).clamp(0.0, 1.0),
    }
}

/// Result of a constant-current simulation.
#[derive(Clone, Debug)]
pub struct HhRun {
    /// Upward 0 mV crossing times (ms, linearly interpolated).
    pub spike_times: Vec<f64>,
    /// Peak voltage reached during each spike's lockout window.
    pub spike_peaks: Vec<f64>,
    /// Voltage at every step (including t = 0) when recording was asked for.
    pub trace: Vec<f64>,
    pub final_state: HhState,
    /// Step at which the state became non-finite, if it did.
    pub diverged_at: Option<usize>,
}

/// Integrate from `init` for `duration` ms, detecting spikes as upward
/// crossings of 0 mV with a 2 ms lockout.
pub fn simulate_hh(
    params: &HhParams,
    init: HhState,
    i_ext: f64,
    duration: f64,
    dt: f64,
    record_trace: bool,
) -> Result<HhRun> {
    params.validate()?;
    init.validate()?;
    ensure_finite("i_ext", i_ext)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be finite and > 0"));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", "must be finite and >= 0"));
    }
    let steps = (duration / dt).round() as usize;
    let mut run = HhRun {
        spike_times: Vec::new(),
        spike_peaks: Vec::new(),
        trace: Vec::new(),
        final_state: init,
        diverged_at: None,
    };
    if record_trace {
        run.trace.reserve(steps + 1);
        run.trace.push(init.v);
    }
    let mut s = init;
    let mut lockout_until = f64::NEG_INFINITY;
    for k in 0..steps {
        let next = rk4(&s, params, i_ext, dt);
        if !next.is_finite() {
            run.diverged_at = Some(k + 1);
            break;
        }
        let t1 = (k + 1) as f64 * dt;
        if s.v < SPIKE_THRESHOLD && next.v >= SPIKE_THRESHOLD {
            let tc = k as f64 * dt + dt * (SPIKE_THRESHOLD - s.v) / (next.v - s.v);
            if tc >= lockout_until {
                run.spike_times.push(tc);
                run.spike_peaks.push(next.v);
                lockout_until = tc + REFRACTORY_MS;
            }
        } else if t1 < lockout_until {
            if let Some(peak) = run.spike_peaks.last_mut() {
                *peak = peak.max(next.v);
            }
        }
        if record_trace {
            run.trace.push(next.v);
        }
        s = next;
    }
    run.final_state = s;
    Ok(run)
}
