#![no_main]

use facemill::config::parse_bench_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(suite) = parse_bench_config(text) {
        assert!(!suite.cases().expect("accepted suites resolve").is_empty());
    }
});
