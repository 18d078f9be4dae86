#![no_main]

use facemill::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(doc) = parse_config(text) {
        let back = parse_config(&doc.to_json()).expect("serialized document parses");
        assert_eq!(back, doc);
    }
});
