#![no_main]

use graphcert::FidelityDecomposition;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(d) = FidelityDecomposition::from_json(text) {
        FidelityDecomposition::from_json(&d.to_json()).expect("serialized decomposition re-parses");
    }
});
