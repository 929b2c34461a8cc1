#![no_main]

use graphcert::bell::parse_settings_code;
use graphcert::{PauliString, StabilizerGenerator};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = text.parse::<PauliString>() {
        let again: PauliString = p.to_string().parse().expect("displayed string re-parses");
        assert_eq!(again, p);
    }
    let _ = text.parse::<StabilizerGenerator>();
    let _ = parse_settings_code(text);
});
