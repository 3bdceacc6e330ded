#![no_main]

use libfuzzer_sys::fuzz_target;
use tambor::io::{demo_to_csv, parse_demo_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(demo) = parse_demo_csv(text) {
        let again = parse_demo_csv(&demo_to_csv(&demo)).expect("written demo parses");
        assert_eq!(again.times(), demo.times());
        for (a, b) in again.samples.iter().zip(&demo.samples) {
            assert_eq!(a.position, b.position);
            assert!(a.orientation.angle_to(&b.orientation) < 1e-9);
        }
    }
});
