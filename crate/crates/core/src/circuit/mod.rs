//! Directed circuits of neuron vertices and synapse edges: discrete-time
//! evaluation, twin substitution and end-to-end error accounting.

mod budget;
mod error_est;
mod eval;
mod file;
mod graph;
mod twin;

pub use budget::{
    error_budget, error_budget_with, lipschitz_estimate, split_global_delta, ComponentBudget, ErrorBudget,
    LIPSCHITZ_INFLATION,
};
pub use error_est::{composite_error, CompositeEstimate, InputDistribution, InputMode};
pub use eval::{evaluate, evaluate_with, static_map, Evaluation, Release};
pub use file::{EdgeSpec, GraphFile, MapRef, NetRef, VertexSpec};
pub use graph::{CircuitGraph, ComponentKind, ComponentModel, Edge, LiveLif, Port, Vertex};
pub use twin::{substitute, sup_error, twinize, DeltaBudget, TwinAssignment, TwinRecord, SUP_ERROR_POINTS};
