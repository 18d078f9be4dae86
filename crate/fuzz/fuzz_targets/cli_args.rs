#![no_main]

use facemill::config::{parse_profile_spec, parse_roi, parse_scale};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok([x0, y0, x1, y1]) = parse_roi(&text) {
        assert!(x0 <= x1 && y0 <= y1);
    }
    let _ = parse_profile_spec(&text);
    if let Ok(sizes) = parse_scale(&text) {
        assert!(sizes.iter().all(|&s| s >= 1));
    }
});
