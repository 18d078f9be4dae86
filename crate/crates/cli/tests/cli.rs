use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const PATCH: &str = r#"{
  "tool": { "diameter_mm": 10.0, "insert_radius_mm": 5.0, "teeth": 2, "radial_rake_deg": 0.6 },
  "process": { "cutting_speed_m_min": 170, "feed_per_tooth_mm": 0.6, "depth_of_cut_mm": 0.5 },
  "grid": { "spacing_mm": 0.02, "x_range_mm": [0.0, 1.0], "y_range_mm": [0.0, 1.2] }
}"#;

fn facemill(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_facemill"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_every_view() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "patch.json", PATCH);
    let out = tmp.path().join("run");
    let o = facemill(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--trajectory"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let names: Vec<String> = files(&out).into_iter().map(|(n, _)| n).collect();
    assert_eq!(
        names,
        ["counters.json", "heights.csv", "metrics.json", "surface.pgm", "surface.srtf", "trajectory.csv"]
    );
    let metrics: Value = serde_json::from_slice(&fs::read(out.join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["metrics"]["S_a_um"].as_f64().unwrap() > 0.0);
    let csv = fs::read_to_string(out.join("heights.csv")).unwrap();
    assert_eq!(csv.lines().count(), 62);
    assert!(fs::read(out.join("surface.pgm")).unwrap().starts_with(b"P5\n51 61\n65535\n"));
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "patch.json", PATCH);
    let mut runs = Vec::new();
    for (k, workers) in ["1", "3", "1"].iter().enumerate() {
        let out = tmp.path().join(format!("run{k}"));
        let o = facemill(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--workers", workers]);
        assert!(o.status.success(), "{}", stderr(&o));
        runs.push(files(&out));
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn validation_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let out = out.to_str().unwrap();

    let bad = write(tmp.path(), "neg.json", &PATCH.replace("\"feed_per_tooth_mm\": 0.6", "\"feed_per_tooth_mm\": -0.1"));
    let o = facemill(&["simulate", "--config", &bad, "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("process.feed_per_tooth_mm"), "{}", stderr(&o));

    let typo = write(tmp.path(), "typo.json", &PATCH.replace("depth_of_cut_mm", "depth_of_cut"));
    let o = facemill(&["simulate", "--config", &typo, "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("process"), "{}", stderr(&o));

    let good = write(tmp.path(), "patch.json", PATCH);
    let o = facemill(&["simulate", "--config", &good, "--out", out, "--workers", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!tmp.path().join("run").exists());

    let o = facemill(&["simulate", "--config", &good]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn runtime_failures_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("absent.json");
    let o = facemill(&["simulate", "--config", missing.to_str().unwrap(), "--out", "unused"]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = write(tmp.path(), "patch.json", PATCH);
    let blocker = write(tmp.path(), "blocker", "");
    let o = facemill(&["simulate", "--config", &cfg, "--out", &blocker]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn roughness_prints_json_on_stdout_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "patch.json", PATCH);
    let out = tmp.path().join("run");
    assert!(facemill(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let surface = out.join("surface.srtf");
    let surface = surface.to_str().unwrap();

    let o = facemill(&["roughness", "--surface", surface, "--roi", "0.2,0.2,0.8,1.0", "--profile", "feed"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["roi"]["i0"], 10);
    assert_eq!(report["roi"]["j1"], 50);
    assert_eq!(report["profile"]["direction"], "feed");
    assert_eq!(report["profile"]["index"], 25);
    assert_eq!(report["profile"]["samples"], 41);
    let m = &report["metrics"];
    let (sp, sv, sz) = (m["S_p_um"].as_f64().unwrap(), m["S_v_um"].as_f64().unwrap(), m["S_z_um"].as_f64().unwrap());
    assert!((sz - (sp + sv)).abs() < 1e-9);
    assert!(stderr(&o).contains("S_a"));

    let whole = facemill(&["roughness", "--surface", surface]);
    let whole: Value = serde_json::from_slice(&whole.stdout).unwrap();
    let from_file: Value = serde_json::from_slice(&fs::read(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(whole["metrics"], from_file["metrics"]);

    for bad in [
        vec!["--roi", "1,2,3"],
        vec!["--roi", "0.8,0.2,0.2,1.0"],
        vec!["--profile", "diagonal"],
        vec!["--profile", "pickfeed:1000"],
    ] {
        let mut args = vec!["roughness", "--surface", surface];
        args.extend(bad.iter());
        let o = facemill(&args);
        assert_eq!(o.status.code(), Some(1), "{bad:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty());
    }

    let mut bytes = fs::read(surface).unwrap();
    bytes.pop();
    let truncated = tmp.path().join("short.srtf");
    fs::write(&truncated, bytes).unwrap();
    let o = facemill(&["roughness", "--surface", truncated.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dataset_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "patch.json", PATCH);
    let doc = r#"{
      "base": "patch.json",
      "ranges": [
        { "name": "feed_per_tooth_mm", "lower": 0.4, "upper": 0.6 },
        { "name": "runout_axial_mm:2", "magnitude": 0.005 }
      ]
    }"#;
    let cfg = write(tmp.path(), "dataset.json", doc);
    let mut runs = Vec::new();
    for (k, workers) in ["1", "2"].iter().enumerate() {
        let out = tmp.path().join(format!("ds{k}"));
        let o = facemill(&[
            "dataset", "--config", &cfg, "--samples", "5", "--seed", "11",
            "--out", out.to_str().unwrap(), "--workers", workers,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        runs.push(files(&out));
    }
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0].len(), 6);
    let manifest = String::from_utf8(runs[0][0].1.clone()).unwrap();
    assert_eq!(manifest.lines().count(), 5);
    for line in manifest.lines() {
        let row: Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["seed"], 11);
        assert_eq!(row["status"], "ok");
    }

    let o = facemill(&["dataset", "--config", &cfg, "--seed", "11", "--out", "unused"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn bench_writes_a_report() {
    let tmp = tempfile::tempdir().unwrap();
    let suite = format!(
        r#"{{ "base": {}, "cases": [{{ "id": "a" }}, {{ "id": "b", "feed_per_tooth_mm": 0.4 }}], "repeats": 1 }}"#,
        PATCH.replace("\"grid\"", "\"engine\": { \"edge_points\": 4 },\n  \"grid\"")
    );
    let cfg = write(tmp.path(), "suite.json", &suite);
    let report = tmp.path().join("report.json");
    let o = facemill(&["bench", "--config", &cfg, "--scale", "1,2", "--out", report.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let points: Vec<u64> = rows.iter().map(|r| r["trajectory_points"].as_u64().unwrap()).collect();
    assert_eq!(points[1], 2 * points[0]);
    assert_eq!(points[3], 2 * points[2]);

    let o = facemill(&["bench", "--config", &cfg, "--scale", "0", "--out", "unused"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let read = |name: &str| fs::read_to_string(dir.join(name)).unwrap();
    for name in ["case1.json", "case2.json", "case3.json", "am_smooth.json", "am_aggressive.json"] {
        let doc = facemill::parse_config(&read(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(doc.simulation.plan().is_ok(), "{name}");
    }
    let case1 = facemill::parse_config(&read("case1.json")).unwrap();
    assert!((case1.simulation.process.angular_velocity - 566.6667).abs() < 1e-3);
    let suite = facemill::config::parse_bench_config(&read("bench_sweep.json")).unwrap();
    assert_eq!(suite.cases().unwrap().len(), 9);
    let ds = facemill::dataset::parse_dataset_document(&read("dataset.json")).unwrap();
    let spec = ds.into_spec(&dir, None, None, Some(1)).unwrap();
    assert_eq!((spec.count, spec.seed, spec.ranges.len()), (32, 42, 4));
}
