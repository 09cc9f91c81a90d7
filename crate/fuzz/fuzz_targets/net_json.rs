#![no_main]
use aitwin_core::approx::Slfn;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(net) = Slfn::from_json_str(data) {
        let x = vec![0.0; net.input_dim];
        let _ = net.forward(&x);
    }
});
