//! End-to-end checks of the `skg` binary.

use std::path::Path;
use std::process::Command;

fn skg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skg"))
}

fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

const GIANT: &str = r#"{"k":2,"entries":[[0.9,0.6],[0.6,0.3]]}"#;

#[test]
fn classify_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "m.json", GIANT);
    let out = skg()
        .args(["classify", "-m"])
        .arg(&matrix)
        .arg("--json")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["case_ids"], serde_json::json!([4, 5]));
    assert_eq!(v["component_regime"], "GIANT");
    assert_eq!(v["connectivity_regime"], "MANY_ISOLATED");
}

#[test]
fn classify_exit_code_zero_for_every_regime() {
    let dir = tempfile::tempdir().unwrap();
    for (name, json) in [
        ("bip.json", r#"{"k":2,"entries":[[0,1],[1,0]]}"#),
        ("crit.json", r#"{"k":2,"entries":[[0.5,0.5],[0.5,0.5]]}"#),
        ("sub.json", r#"{"k":2,"entries":[[0.6,0.2],[0.2,0.6]]}"#),
    ] {
        let matrix = write(dir.path(), name, json);
        let out = skg().args(["classify", "-m"]).arg(&matrix).output().unwrap();
        assert!(out.status.success(), "{name} failed");
    }
    // a malformed matrix is a real error
    let bad = write(dir.path(), "bad.json", r#"{"k":2,"entries":[[0.5,2.0],[2.0,0.5]]}"#);
    let out = skg().args(["classify", "-m"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("(1,2)"));
}

#[test]
fn spectrum_json_fields() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "m.json", GIANT);
    let out = skg()
        .args(["spectrum", "-m"])
        .arg(&matrix)
        .args(["-t", "3", "--eps", "0.1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["mu"][0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(v["gap"].as_f64().unwrap() > 0.9);
    assert!(v["s"].as_u64().unwrap() >= 1);
    assert!(v["delta_s"].as_f64().unwrap() < 0.1);
    assert_eq!(v["kron"]["total_multiplicity"], "8");
    assert!(v["cheeger"][0].as_f64().unwrap() > 0.0);
}

#[test]
fn sample_stats_roundtrip_binary_and_text() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "m.json", GIANT);
    for name in ["edges.bin", "edges.txt"] {
        let edges = dir.path().join(name);
        let out = skg()
            .args(["sample", "-m"])
            .arg(&matrix)
            .args(["-t", "6", "--seed", "9", "--workers", "2", "-o"])
            .arg(&edges)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let out = skg()
            .args(["stats", "-g"])
            .arg(&edges)
            .args(["--diameter", "--json"])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["stats"]["n"], 64);
        assert_eq!(v["seed"], 9);
        assert!(v["diameter"].is_u64());
    }
    // both formats hold the same sample
    let text = std::fs::read_to_string(dir.path().join("edges.txt")).unwrap();
    assert!(text.starts_with("# skg-edges v1\n# k=2 t=6 n=64 seed=9\n"));
}

#[test]
fn sample_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "m.json", GIANT);
    let out = skg()
        .args(["sample", "-m"])
        .arg(&matrix)
        .args(["-t", "3", "--seed", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# skg-edges v1\n"));
}

#[test]
fn experiment_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "m.json", GIANT);
    let csv = dir.path().join("results.csv");
    let config = write(
        dir.path(),
        "exp.toml",
        &format!(
            r#"
matrix = "{}"
t_values = [5, 6]
replicates = 2
master_seed = 7
metrics = ["components", "isolated"]
output = "{}"
"#,
            matrix.display(),
            csv.display()
        ),
    );
    let out = skg().args(["experiment", "--config"]).arg(&config).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let content = std::fs::read_to_string(&csv).unwrap();
    let mut lines = content.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,n,seed,m,isolated,largest,second_largest,largest_fraction,component_count,cases,flags"
    );
    assert_eq!(lines.count(), 4);
    let sidecar = std::fs::read_to_string(dir.path().join("results.csv.report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
    assert_eq!(v["report"]["case_ids"], serde_json::json!([4, 5]));
}
