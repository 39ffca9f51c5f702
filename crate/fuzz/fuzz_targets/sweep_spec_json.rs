#![no_main]

use ehfbl::sweep::SweepSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = SweepSpec::from_json(text) {
        let _ = spec.params();
        let _ = spec.n.values();
    }
});
