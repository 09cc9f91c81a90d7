//! Digital twins of neural circuits built from single-hidden-layer networks.

pub mod approx;
pub mod bio;
pub mod circuit;
mod error;
pub mod map;
pub mod rng;
pub mod smoothness;

pub use error::{Error, Result};
pub use map::{Analytic, ComponentMap, Domain, MapSource, SCHEMA_VERSION};
