#![no_main]

use graphcert::certify::ParameterGrid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(grid) = text.parse::<ParameterGrid>() {
        if grid.steps <= 1 << 16 {
            let points = grid.points();
            assert_eq!(points.len(), grid.steps);
            assert!(points.iter().all(|p| (0.0..=1.0).contains(p)));
        }
    }
});
