use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
seed = 1

[scaling]
beta = 0.25
n = [2, 3]
omega = { rule = "middle" }

[potential]
terms = [{ depth = 2.6, width = 0.5, sign = "minus" }]

[basis]
max_level = 1
z_points = 8
box_length = 16.0

[time]
t_final = 0.2
samples = 4
dt = 0.01

[initial]
mode = "product"
profile = { kind = "soliton" }

[outputs]
dir = "out"
snapshots = true
"#;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_focusing-lab"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn with_config(text: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("exp.toml"), text).unwrap();
    dir
}

#[test]
fn sweep_writes_results_gaps_and_snapshots() {
    let dir = with_config(CONFIG);
    let out = run(dir.path(), &["sweep", "--config", "exp.toml", "--out", "res", "--threads", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let res = dir.path().join("res");
    let lines = std::fs::read_to_string(res.join("results.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 10);
    assert!(std::fs::read_to_string(res.join("gaps.csv")).unwrap().starts_with("t,N,omega,beta,quantity,value"));
    assert!(res.join("snapshots/cell0_N2.bin").exists());
    assert!(res.join("snapshots/cell1_N3.bin").exists());
}

#[test]
fn missing_or_malformed_config_exits_with_three() {
    let dir = with_config(&CONFIG.replace("seed = 1", "seed = 1\nflavour = 2"));
    assert_eq!(run(dir.path(), &["sweep"]).status.code(), Some(3));
    assert_eq!(run(dir.path(), &["sweep", "--config", "exp.toml"]).status.code(), Some(3));
}

#[test]
fn out_of_window_omega_exits_with_three() {
    let dir = with_config(&CONFIG.replace(r#"{ rule = "middle" }"#, r#"{ rule = "fixed", values = [40.0, 60.0] }"#));
    let out = run(dir.path(), &["sweep", "--config", "exp.toml"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
}

#[test]
fn oversized_run_exits_with_three_unless_allowed() {
    let dir = with_config(&CONFIG.replace("n = [2, 3]", "n = [2, 5]"));
    assert_eq!(run(dir.path(), &["verify", "--config", "exp.toml"]).status.code(), Some(3));
}

#[test]
fn nls_reports_a_small_soliton_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["nls", "--t-final", "0.2", "--out", "nls"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let line = std::fs::read_to_string(dir.path().join("nls/results.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert!(v["l2_error"].as_f64().unwrap() < 1e-4, "{v}");
}

#[test]
fn evolve_saves_the_final_state() {
    let dir = with_config(CONFIG);
    let out = run(dir.path(), &["evolve", "--config", "exp.toml", "--cell", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/snapshots/cell1_N3.bin").exists());
}
