//! Single-hidden-layer feedforward networks and their training.

mod bp;
mod dataset;
mod elm;
mod gradcheck;
mod l2;
mod linalg;
mod report;
mod slfn;
mod tolerance;

pub use bp::{bp_train, BpConfig};
pub use dataset::Dataset;
pub use elm::{draw_hidden, elm_train, ElmConfig, DEFAULT_HIDDEN_RANGE};
pub use gradcheck::{bp_gradient_check, GradientCheck};
pub use l2::l2_error;
pub use report::{bp_flops_per_sample, Method, TrainReport, BP_FLOP_FORMULA, ELM_FLOP_FORMULA};
pub use slfn::{Activation, Slfn};
pub use tolerance::{heldout_grid, train_to_tolerance, ToleranceConfig, ELM_START_HIDDEN};
