#![no_main]

use ehfbl::DmcSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = DmcSpec::from_text(text) {
        // Anything accepted must survive its own rendering.
        let again = DmcSpec::from_text(&spec.to_text()).expect("rendered channel reparses");
        assert_eq!(again, spec);
    }
});
