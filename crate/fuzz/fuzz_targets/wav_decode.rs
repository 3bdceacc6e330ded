#![no_main]

use libfuzzer_sys::fuzz_target;
use tambor::analysis::ANALYSIS_SAMPLE_RATE;

fuzz_target!(|data: &[u8]| {
    if let Ok(frame) = tambor::io::decode_wav(data) {
        assert_eq!(frame.sample_rate, ANALYSIS_SAMPLE_RATE);
    }
});
