#![no_main]

use graphcert::certify::{NoiseModel, NoiseSpec};
use graphcert::StateFamily;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = text.parse::<NoiseSpec>() {
        let again: NoiseSpec = spec.to_string().parse().expect("displayed spec re-parses");
        assert_eq!(again, spec);
    }
    let _ = text.parse::<NoiseModel>();
    let _ = text.parse::<StateFamily>();
});
