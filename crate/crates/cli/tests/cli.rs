use std::path::Path;
use std::process::{Command, Output};

fn touchbench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_touchbench")).args(args).current_dir(dir).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = touchbench(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn gen_data_count_matches_request() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(tmp.path(), &["gen-data", "--n", "1630", "--seed", "2", "--out", "d"]);
    assert!(stdout.contains("# seed = 2"));
    assert!(stdout.contains("# samples = 1630"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("d/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["count"], 1630);
    assert_eq!(manifest["split"].as_array().unwrap().len(), 1630);
}

#[test]
fn report_has_ten_touches_per_episode() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen-data", "--n", "20", "--seed", "1", "--out", "d"]);
    ok(d, &["train", "--data", "d", "--epochs", "1", "--out", "m.i2tf"]);
    ok(d, &["recognize", "--model", "m.i2tf", "--set", "primitives", "--mode", "i2t", "--episodes", "2", "--touches", "10", "--out", "r.jsonl"]);
    let text = std::fs::read_to_string(d.join("r.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let touches: Vec<&serde_json::Value> = lines.iter().filter(|l| l["kind"] == "touch").collect();
    // 3 objects × 2 episodes
    assert_eq!(touches.len(), 60);
    for e in 0..6 {
        let mine: Vec<u64> =
            touches.iter().filter(|t| t["episode"] == e).map(|t| t["touch"].as_u64().unwrap()).collect();
        assert_eq!(mine, (1..=10).collect::<Vec<u64>>());
    }
    let summary = lines.last().unwrap();
    assert_eq!(summary["kind"], "summary");
    assert_eq!(summary["mode"], "i2t");
    assert_eq!(summary["accuracy_per_touch"].as_array().unwrap().len(), 10);
    for t in touches {
        let p: f64 = t["posterior"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
        assert!((p - 1.0).abs() < 1e-12);
    }
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("c.conf"), "# test\nseed = 9\nclusters = 3\n").unwrap();
    let out = ok(tmp.path(), &["--config", "c.conf", "--override", "clusters=4", "config"]);
    assert!(out.lines().any(|l| l == "seed = 9"));
    assert!(out.lines().any(|l| l == "clusters = 4"));
}

#[test]
fn errors_have_distinct_messages_and_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();

    let unknown = touchbench(d, &["gen-data", "--bogus", "--out", "x"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("--bogus"));

    let missing = touchbench(d, &["train", "--data", "absent", "--out", "m"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("absent"));

    std::fs::write(d.join("bad.conf"), "seed 3\n").unwrap();
    let malformed = touchbench(d, &["--config", "bad.conf", "config"]);
    assert_eq!(malformed.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&malformed.stderr).contains("bad.conf:1"));

    let set = touchbench(d, &["gen-data", "--objects", "nothing", "--out", "x"]);
    assert_eq!(set.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&set.stderr).contains("nothing"));
}

#[test]
fn cluster_writes_report_and_graymaps() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["gen-data", "--n", "30", "--seed", "5", "--out", "d"]);
    ok(d, &["cluster", "--data", "d", "--k", "5", "--out", "c.json", "--pgm-dir", "pgm"]);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("c.json")).unwrap()).unwrap();
    let sizes: u64 = doc["clusters"].as_array().unwrap().iter().map(|c| c["size"].as_u64().unwrap()).sum();
    assert_eq!(sizes, 30);
    for i in 0..5 {
        assert!(std::fs::read(d.join(format!("pgm/cluster{i}.pgm"))).unwrap().starts_with(b"P5\n48 48\n255\n"));
    }
}
