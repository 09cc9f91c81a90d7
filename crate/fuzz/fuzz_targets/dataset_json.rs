#![no_main]
use aitwin_core::approx::Dataset;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(d) = Dataset::from_json_str(data) {
        let _ = d.quadrature_weights();
    }
});
