#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _: Result<ehfbl::DmcSpec, _> = serde_json::from_slice(data);
});
