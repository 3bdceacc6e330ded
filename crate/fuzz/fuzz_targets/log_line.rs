#![no_main]

use libfuzzer_sys::fuzz_target;
use tambor::actuators::LogLine;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(lines) = LogLine::parse_all(text) {
        for l in lines {
            assert_eq!(LogLine::parse(&l.to_json()).unwrap(), l);
        }
    }
});
