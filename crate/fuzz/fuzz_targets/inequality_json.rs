#![no_main]

use graphcert::BellInequality;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(b) = BellInequality::from_json(text) {
        let again =
            BellInequality::from_json(&b.to_json()).expect("serialized inequality re-parses");
        assert_eq!(again, b);
        if b.parties() <= 6 {
            let _ = graphcert::bell::brute_force_classical_bound(&b);
        }
    }
});
