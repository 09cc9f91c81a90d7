#![no_main]
use aitwin_core::circuit::CircuitGraph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(graph) = CircuitGraph::from_json_str(data) {
        let again = graph.to_json_string().expect("serialise accepted graph");
        CircuitGraph::from_json_str(&again).expect("reparse");
    }
});
