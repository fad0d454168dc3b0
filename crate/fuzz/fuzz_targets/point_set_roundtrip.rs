#![no_main]

use std::sync::{Arc, OnceLock};

use fqdist::pointset::{parse_point_set, write_point_set};
use fqdist::GridDomain;
use libfuzzer_sys::fuzz_target;

fn grid() -> Arc<GridDomain> {
    static GRID: OnceLock<Arc<GridDomain>> = OnceLock::new();
    GRID.get_or_init(|| GridDomain::build(3, 2, 3).expect("F_9^3 builds"))
        .clone()
}

// Whatever parses must survive write-then-parse unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(set) = parse_point_set(text, grid()) {
        let again = parse_point_set(&write_point_set(&set), grid()).expect("rendered set parses");
        assert_eq!(again.points(), set.points());
    }
});
