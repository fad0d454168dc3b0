#![no_main]

use fqdist::pointset::parse_bytes;
use libfuzzer_sys::fuzz_target;

// The first two bytes pick the dimension and modulus so one corpus covers
// several grid shapes.
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let d = 1 + (data[0] % 6) as usize;
    let q = 1 + data[1] as u32;
    if let Ok(vectors) = parse_bytes(&data[2..], d, q) {
        assert!(!vectors.is_empty());
        for v in &vectors {
            assert_eq!(v.len(), d);
            assert!(v.iter().all(|&c| c < q));
        }
    }
});
