#![no_main]
use aitwin_core::bio::ComponentFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    // Only parse and validate: building a map runs simulations.
    let _ = ComponentFile::from_json_str(data);
});
