#![no_main]

use libfuzzer_sys::fuzz_target;
use tambor::rhythmgen::GridPattern;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = GridPattern::from_json(text) {
        assert_eq!(GridPattern::from_json(&p.to_json()).unwrap(), p);
    }
});
