//! Replays the checked-in fuzz corpus seeds through the fuzz target bodies.

use std::fs;
use std::path::PathBuf;

use facemill::config::{parse_bench_config, parse_profile_spec, parse_roi, parse_scale};
use facemill::dataset::parse_dataset_document;
use facemill::surface_io::{decode_header, decode_surface, encode_surface};
use facemill::parse_config;

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn surface_seeds() {
    let mut decoded = 0;
    for (name, data) in seeds("surface_decode") {
        let header = decode_header(&data);
        if let Ok(field) = decode_surface(&data) {
            assert!(header.is_ok(), "{name}");
            assert_eq!(encode_surface(&field).unwrap(), data, "{name}");
            decoded += 1;
        }
    }
    assert_eq!(decoded, 3);
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (name, data) in seeds("config_parse") {
        let text = std::str::from_utf8(&data).unwrap();
        if let Ok(doc) = parse_config(text) {
            assert_eq!(parse_config(&doc.to_json()).unwrap(), doc, "{name}");
            accepted += 1;
        }
    }
    assert_eq!(accepted, 3);
}

#[test]
fn dataset_seeds() {
    let verdicts: Vec<(String, bool)> = seeds("dataset_config_parse")
        .into_iter()
        .map(|(name, data)| {
            let ok = parse_dataset_document(std::str::from_utf8(&data).unwrap()).is_ok();
            (name, ok)
        })
        .collect();
    let accepted: Vec<&str> = verdicts.iter().filter(|v| v.1).map(|v| v.0.as_str()).collect();
    assert_eq!(accepted, ["seed_inline.json", "seed_path.json"]);
}

#[test]
fn bench_seeds() {
    for (name, data) in seeds("bench_config_parse") {
        let text = std::str::from_utf8(&data).unwrap();
        match parse_bench_config(text) {
            Ok(suite) => assert!(!suite.cases().unwrap().is_empty(), "{name}"),
            Err(_) => assert_eq!(name, "seed_empty_cases.json"),
        }
    }
}

#[test]
fn cli_arg_seeds() {
    for (_, data) in seeds("cli_args") {
        let text = String::from_utf8_lossy(&data);
        if let Ok([x0, y0, x1, y1]) = parse_roi(&text) {
            assert!(x0 <= x1 && y0 <= y1);
        }
        let _ = parse_profile_spec(&text);
        if let Ok(sizes) = parse_scale(&text) {
            assert!(sizes.iter().all(|&s| s >= 1));
        }
    }
}
