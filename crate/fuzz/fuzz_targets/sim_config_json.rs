#![no_main]

use ehfbl::sim::SimConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(config) = serde_json::from_slice::<SimConfig>(data) {
        let _ = config.check();
    }
});
