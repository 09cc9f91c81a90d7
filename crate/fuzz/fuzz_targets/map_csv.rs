#![no_main]
use aitwin_core::ComponentMap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(map) = ComponentMap::from_csv_str(data) {
        let _ = map.value_range();
        let _ = map.to_csv_string();
    }
});
