use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lonkit::lon::Lon;

fn lonkit(ws: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lonkit"))
        .arg("--workspace")
        .arg(ws)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(path: &Path, text: &str) -> PathBuf {
    fs::write(path, text).unwrap();
    path.to_path_buf()
}

const CHAIN: &str = r#"{
  "space_hash": null,
  "vertices": [{"k": "a", "f": 3.0, "m": 1}, {"k": "b", "f": 2.0, "m": 1}, {"k": "c", "f": 1.0, "m": 1}],
  "edges": [{"s": "a", "d": "b", "c": 1}, {"s": "b", "d": "c", "c": 1}],
  "provenance": [1]
}"#;

#[test]
fn single_configuration_space_gives_one_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(&dir.path().join("one.txt"), "opt=only\n");
    let table = write(&dir.path().join("one.csv"), "opt,fitness\nonly,4.5\n");
    let ws = dir.path().join("ws");
    let o = lonkit(
        &ws,
        &["sample", "--space", space.to_str().unwrap(), "--table", table.to_str().unwrap(), "--runs", "1"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let runs: Vec<_> = fs::read_dir(ws.join("runs")).unwrap().collect();
    assert_eq!(runs.len(), 1);
    let text = fs::read_to_string(ws.join("runs/run-0000.jsonl")).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("\"t\":\"v\"")).count(), 1);
    assert!(fs::read_to_string(ws.join("space.txt")).unwrap().contains("opt=only"));
}

#[test]
fn sample_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for ws in [&a, &b] {
        let o = lonkit(ws, &["--seed", "1", "sample", "--nk", "10,2,7", "--runs", "6", "--target", "5"]);
        assert_eq!(code(&o), 0);
        assert!(stdout(&o).contains("run-0005"));
    }
    for j in 0..6 {
        let name = format!("runs/run-{j:04}.jsonl");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
    // fewer runs on rerun leaves no stale traces behind
    assert_eq!(code(&lonkit(&a, &["sample", "--nk", "10,2,7", "--runs", "2", "--target", "5"])), 0);
    assert_eq!(fs::read_dir(a.join("runs")).unwrap().count(), 2);
}

#[test]
fn sample_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    assert_eq!(code(&lonkit(ws, &["sample", "--nk", "4,9,1"])), 2);
    assert_eq!(code(&lonkit(ws, &["sample", "--nk", "4,1"])), 2);
    assert_eq!(code(&lonkit(ws, &["sample"])), 2);
    // table without any configuration space
    assert_eq!(code(&lonkit(ws, &["sample", "--table", "missing.csv"])), 2);
    let space = write(&ws.join("s.txt"), "a=0,1\n");
    assert_eq!(
        code(&lonkit(ws, &["sample", "--space", space.to_str().unwrap(), "--exec", "echo 1"])),
        2
    );
}

#[test]
fn partial_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(&dir.path().join("s.txt"), "a=0,1,2,3\nb=0,1,2,3\n");
    // only half of the space is measured: some repeats hit a missing row
    let mut rows = String::from("a,b,fitness\n");
    for a in 0..4 {
        for b in 0..2 {
            rows.push_str(&format!("{a},{b},{}\n", (a * 3 + b) % 5));
        }
    }
    let table = write(&dir.path().join("t.csv"), &rows);
    let o = lonkit(
        dir.path(),
        &["sample", "--space", space.to_str().unwrap(), "--table", table.to_str().unwrap(), "--runs", "8", "--target", "3"],
    );
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(String::from_utf8_lossy(&o.stderr).contains("failed"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("config"), "runs=3\ntarget=4\nseed=2\n");
    let o = lonkit(dir.path(), &["sample", "--nk", "8,1,1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_dir(dir.path().join("runs")).unwrap().count(), 3);
    let first = fs::read_to_string(dir.path().join("runs/run-0000.jsonl")).unwrap();
    assert!(first.starts_with("{\"t\":\"h\",\"seed\":2,"));
    write(&dir.path().join("config"), "colour=blue\n");
    assert_eq!(code(&lonkit(dir.path(), &["sample", "--nk", "8,1,1"])), 2);
}

#[test]
fn stable_on_identical_pool_decides_at_three() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    assert_eq!(code(&lonkit(ws, &["sample", "--nk", "10,3,5", "--runs", "1", "--target", "12"])), 0);
    let one = fs::read(ws.join("runs/run-0000.jsonl")).unwrap();
    for j in 1..30 {
        fs::write(ws.join(format!("runs/run-{j:04}.jsonl")), &one).unwrap();
    }
    let o = lonkit(ws, &["stable"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("decision_i=3 n_stable=20"));
    let stable = Lon::load(&ws.join("lons/stable.json")).unwrap();
    assert_eq!(stable.provenance().len(), 20);
    let csv = fs::read_to_string(ws.join("reports/stability.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "i,sample_index,ac,acc"));
}

#[test]
fn stable_needs_enough_traces() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    assert_eq!(code(&lonkit(ws, &["sample", "--nk", "8,1,1", "--runs", "5", "--target", "3"])), 0);
    assert_eq!(code(&lonkit(ws, &["stable"])), 2);
}

#[test]
fn stable_is_reproducible_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    assert_eq!(code(&lonkit(ws, &["sample", "--nk", "10,4,3", "--runs", "40", "--target", "15"])), 0);
    let mut seen = Vec::new();
    for seed in ["1", "1", "2"] {
        let o = lonkit(ws, &["--seed", seed, "stable", "--step", "4"]);
        seen.push((stdout(&o), fs::read(ws.join("reports/stability.csv")).unwrap()));
    }
    assert_eq!(seen[0], seen[1]);
    assert_ne!(seen[0].1, seen[2].1);
}

#[test]
fn analyze_chain_summary() {
    let dir = tempfile::tempdir().unwrap();
    let lon = write(&dir.path().join("chain.json"), CHAIN);
    let o = lonkit(dir.path(), &["analyze", "--no-prune", lon.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("VN      3"));
    assert!(s.contains("EN      2"));
    assert!(s.contains("SPL     1.500"));
    assert!(s.contains("ND      0.3333"));
    assert!(s.contains("ACC     0"));
    assert!(s.contains("AC      undefined"));
    assert!(s.contains("funnels 1"));
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("reports/chain-metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["spl"], 1.5);
    assert_eq!(metrics["producer"]["command"], "analyze");
    assert!(dir.path().join("reports/chain-rcc.csv").exists());
    assert!(dir.path().join("reports/chain-base-ranks.csv").exists());
    assert!(dir.path().join("reports/chain-funnels.json").exists());
    assert!(!dir.path().join("lons/chain-pruned.json").exists());
}

#[test]
fn analyze_prunes_inferior_sinks() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"space_hash": null,
      "vertices": [{"k": "a", "f": 1.0, "m": 2}, {"k": "b", "f": 5.0, "m": 3}, {"k": "c", "f": 0.5, "m": 1}, {"k": "d", "f": 4.0, "m": 1}],
      "edges": [{"s": "a", "d": "b", "c": 1}, {"s": "a", "d": "c", "c": 1}, {"s": "c", "d": "d", "c": 2}],
      "provenance": []}"#;
    let lon = write(&dir.path().join("g.json"), text);
    let o = lonkit(dir.path(), &["analyze", lon.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let raw = Lon::load(&lon).unwrap();
    let pruned = Lon::load(&dir.path().join("lons/g-pruned.json")).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("reports/g-prune.json")).unwrap()).unwrap();
    let removed: Vec<&str> = report["removed"].as_array().unwrap().iter().map(|r| r["key"].as_str().unwrap()).collect();
    assert_eq!(removed, vec!["b", "d"]);
    for v in raw.vertices() {
        assert_eq!(pruned.id_of(&v.key).is_some(), !removed.contains(&v.key.as_str()));
    }
    assert_eq!(report["removed_multiplicity"], 4);
}

#[test]
fn analyze_reports_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir.path().join("bad.json"), "{\"vertices\": [}");
    let o = lonkit(dir.path(), &["analyze", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn export_formats() {
    let dir = tempfile::tempdir().unwrap();
    let lon = write(&dir.path().join("chain.json"), CHAIN);
    for (fmt, needle) in [("dot", "fillcolor=red"), ("graphml", "<graphml"), ("json", "\"provenance\"")] {
        let o = lonkit(dir.path(), &["export", lon.to_str().unwrap(), "--format", fmt]);
        assert_eq!(code(&o), 0);
        let text = fs::read_to_string(dir.path().join(format!("reports/chain.{fmt}"))).unwrap();
        assert!(text.contains(needle), "{fmt}");
    }
    let back = Lon::load(&dir.path().join("reports/chain.json")).unwrap();
    assert_eq!(back, Lon::load(&lon).unwrap());
    assert_eq!(code(&lonkit(dir.path(), &["export", lon.to_str().unwrap(), "--format", "svg"])), 2);
}

#[test]
fn compare_self_and_usage() {
    let dir = tempfile::tempdir().unwrap();
    let lon = write(&dir.path().join("chain.json"), CHAIN);
    let p = lon.to_str().unwrap();
    let o = lonkit(dir.path(), &["compare", p, p]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = fs::read_to_string(dir.path().join("reports/similarity.csv")).unwrap();
    let body: Vec<&str> = m.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, vec!["lon_id,chain,chain#2", "chain,1,1", "chain#2,1,1"]);
    assert_eq!(code(&lonkit(dir.path(), &["compare", p])), 2);
}

#[test]
fn artifacts_carry_no_absolute_paths() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    assert_eq!(code(&lonkit(ws, &["sample", "--nk", "8,2,1", "--runs", "30", "--target", "6"])), 0);
    let _ = lonkit(ws, &["stable"]);
    assert_eq!(code(&lonkit(ws, &["analyze"])), 0);
    assert_eq!(code(&lonkit(ws, &["export", "--format", "graphml"])), 0);
    let root = ws.to_str().unwrap();
    for sub in ["runs", "lons", "reports"] {
        for entry in fs::read_dir(ws.join(sub)).unwrap() {
            let text = fs::read_to_string(entry.unwrap().path()).unwrap();
            assert!(!text.contains(root));
        }
    }
}
