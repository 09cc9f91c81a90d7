#![no_main]
use aitwin_core::ComponentMap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(map) = ComponentMap::from_json_str(data) {
        // Anything accepted must survive its own serialisation.
        let again = map.to_json_string().expect("serialise accepted map");
        assert_eq!(ComponentMap::from_json_str(&again).expect("reparse"), map);
    }
});
