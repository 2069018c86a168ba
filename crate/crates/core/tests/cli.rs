use std::path::Path;
use std::process::{Command, Output};

fn heckelab(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_heckelab"));
    cmd.args(args).env_remove("HECKELAB_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.env("HECKELAB_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn graph_example_writes_json_with_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("graph.json");
    let o = heckelab(
        &["graph", "--p", "37", "--ell", "2", "--out", out.to_str().unwrap()],
        Some(&dir.path().join("cache")),
    );
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let spectrum: Vec<f64> = doc["spectrum"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (a, b) in spectrum.iter().zip([3.0, 0.0, -2.0]) {
        assert!((a - b).abs() < 1e-8, "{spectrum:?}");
    }
    assert_eq!(doc["graph"]["adjacency"].as_array().unwrap().len(), 3);
    assert_eq!(doc["config"]["command"], "graph");
    assert_eq!(doc["config"]["format"], "json");
    assert!(dir.path().join("cache/graph-v1-p37-l2-s0.json").exists());
}

#[test]
fn thm1_example_row() {
    let o = heckelab(&["thm1", "--p", "37", "--m", "2", "--n", "2", "--format", "csv"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("# {"));
    let config: serde_json::Value = serde_json::from_str(&header[2..]).unwrap();
    assert_eq!(config["m"], 2);
    assert_eq!(config["levels"], serde_json::json!([37]));
    assert_eq!(config["seed"], 0);
    let r = rows(&text);
    assert_eq!(r[0], ["p", "m", "n", "lhs", "main", "residual", "scale", "ratio"]);
    let lhs: f64 = r[1][3].parse().unwrap();
    let main: f64 = r[1][4].parse().unwrap();
    assert!((lhs - 1.0).abs() < 1e-9);
    assert_eq!(main, 1.5);
}

#[test]
fn smooth_example_count() {
    let o = heckelab(&["smooth", "--psi", "--y", "3", "--X", "20"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rows(&stdout(&o)), [["X", "y", "psi_exact"], ["20", "3", "10"]]);
}

#[test]
fn exit_codes_and_usage() {
    let o = heckelab(&["thm1", "--p", "37", "--frobnicate"], None);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Usage"), "{err}");
    assert!(o.stdout.is_empty());

    assert_eq!(heckelab(&["no-such-command"], None).status.code(), Some(1));
    assert_eq!(heckelab(&["graph", "--p", "41"], None).status.code(), Some(1));
    assert_eq!(heckelab(&["spectra"], None).status.code(), Some(1));
    assert_eq!(heckelab(&["mult", "--p", "37", "--y", "19"], None).status.code(), Some(1));
    assert_eq!(heckelab(&["thm1", "--p", "13"], None).status.code(), Some(1));
    // y^T beyond the sieve limit is a computation failure, not a usage error
    let o = heckelab(&["smooth", "--supersmooth", "--n", "1201", "--y", "100000", "--T", "3"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resource limit"));
    assert_eq!(heckelab(&["--version"], None).status.code(), Some(0));
}

#[test]
fn ladder_flag_expands_levels() {
    let o = heckelab(&["spectra", "--ladder", "100", "--primes", "2", "--format", "json"], None);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["config"]["levels"], serde_json::json!([13, 37, 61, 73, 97]));
    let ps: Vec<u64> = doc["rows"].as_array().unwrap().iter().map(|r| r["p"].as_u64().unwrap()).collect();
    assert_eq!(ps.iter().filter(|&&p| p == 97).count(), 7);
    assert!(!ps.contains(&13));
}

#[test]
fn timestamps_only_on_request() {
    let plain = stdout(&heckelab(&["plancherel", "--primes", "2", "--max", "1"], None));
    assert!(!plain.contains("generated"));
    let stamped = stdout(&heckelab(&["plancherel", "--primes", "2", "--max", "1", "--timestamps"], None));
    assert!(stamped.lines().nth(1).unwrap().starts_with("# generated_unix="));
    assert_eq!(rows(&plain), rows(&stamped));
}

#[test]
fn corrupted_cache_is_recomputed_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["walk", "--p", "61", "--tmax", "3"];
    let first = heckelab(&args, Some(dir.path()));
    assert_eq!(first.status.code(), Some(0));
    let entry = dir.path().join("graph-v1-p61-l2-s0.json");
    std::fs::write(&entry, "{\"p\": 61").unwrap();
    let second = heckelab(&args, Some(dir.path()));
    assert_eq!(second.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&second.stderr).contains("corrupted cache entry"));
    assert_eq!(first.stdout, second.stdout);
    assert!(std::fs::read_to_string(&entry).unwrap().len() > 20);
}

#[test]
fn bound_and_partition_modes() {
    let o = heckelab(&["mult", "--bound", "thm4", "--log-n", "10", "--beta", "1/4", "--d", "1"], None);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r[1][7], "5/2");
    let o = heckelab(&["mult", "--p", "37", "--partition"], None);
    let r = rows(&stdout(&o));
    assert_eq!(r[1][4], "1;1");
    let o = heckelab(&["mult", "--p", "37", "--y", "2"], None);
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 3);
    assert!(r[1..].iter().all(|row| row[3] == "1"));
}
