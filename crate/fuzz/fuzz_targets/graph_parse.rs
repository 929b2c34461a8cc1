#![no_main]

use graphcert::Graph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = Graph::parse(text) {
        let again = Graph::parse(&g.to_text()).expect("text form re-parses");
        assert_eq!(again, g);
    }
});
