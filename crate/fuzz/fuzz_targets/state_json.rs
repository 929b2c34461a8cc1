#![no_main]

use graphcert::QuantumState;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(s) = QuantumState::from_json(text) {
        let again = QuantumState::from_json(&s.to_json()).expect("serialized state re-parses");
        assert_eq!(again, s);
    }
});
