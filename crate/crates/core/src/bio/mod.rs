//! Reference biological components and their static maps.

mod hh;
mod lif;
mod params;
mod rate;
mod readout;
mod synapse;

pub use hh::{
    hh_step, simulate_hh, HhParams, HhRun, HhState, DEFAULT_DT, REFRACTORY_MS, SPIKE_THRESHOLD,
};
pub use lif::{lif_rate, simulate_lif, LifParams};
pub use params::{ComponentFile, ComponentSpec};
pub use rate::{firing_rate_map, rate_from_spikes, Exclusion, NeuronModel, RateMap, RateOptions};
pub use readout::all_or_none_readout;
pub use synapse::{synapse_map, SynapseParams};
