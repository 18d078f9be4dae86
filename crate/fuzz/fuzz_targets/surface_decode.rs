#![no_main]

use facemill::surface_io::{decode_header, decode_surface, encode_surface};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let header = decode_header(data);
    if let Ok(field) = decode_surface(data) {
        assert!(header.is_ok());
        // anything that decodes must re-encode to the same bytes
        let again = encode_surface(&field).expect("decoded field encodes");
        assert_eq!(again, data);
    }
});
