#![no_main]

use ehfbl::energy::EnergyProcess;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(law) = serde_json::from_slice::<EnergyProcess>(data) {
        let _ = ehfbl::energy::sample_arrivals(&law, 16, 0);
    }
});
