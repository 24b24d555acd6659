use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn sfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfc-survive"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const PATH3: &str = r#"{"nodes":3,"capacities":[2,2,2],"links":[[0,1],[1,2]],"types":1,"m":[[1],[0],[1]]}"#;

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn solve_pull_prints_plan() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "inst.json", PATH3);
    let out = sfc(&["solve", "--algorithm", "pull", "--dmax", "2", s(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    let plan = stdout_json(&out);
    assert_eq!(plan["x"], serde_json::json!([[0], [1], [0]]));
    assert_eq!(plan["unprotected"], serde_json::json!([]));
    assert_eq!(plan["assignments"].as_array().unwrap().len(), 2);
}

#[test]
fn exact_plan_verifies() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "inst.json", PATH3);
    let plan = dir.path().join("plan.json");
    let out = sfc(&["solve", "--dmax", "1", "--out", s(&plan), s(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    let out = sfc(&["verify", "--dmax", "1", s(&inst), s(&plan)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = stdout_json(&out);
    assert_eq!(report["valid"], Value::Bool(true));
    assert_eq!(report["survivable"], Value::Bool(true));
}

#[test]
fn verify_rejects_bad_plan() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "inst.json", PATH3);
    // node 0 backed up on itself, node 2 missing
    let bad = write(
        &dir,
        "bad.json",
        r#"{"x":[[1],[0],[0]],"assignments":[{"src":0,"type":0,"host":0}],"unprotected":[]}"#,
    );
    let out = sfc(&["verify", s(&inst), s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["valid"], Value::Bool(false));
    let kinds: Vec<&str> = report["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["violation"].as_str().unwrap())
        .collect();
    assert!(kinds.contains(&"self_hosting"), "{kinds:?}");
    assert!(kinds.contains(&"missing_assignment"), "{kinds:?}");
    assert!(!report["failures"].as_array().unwrap().is_empty());
}

#[test]
fn infeasible_instance_exits_1() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        &dir,
        "inst.json",
        r#"{"nodes":3,"capacities":[2,1,5],"links":[[0,1],[1,2]],"m":[[1],[1],[0]]}"#,
    );
    let out = sfc(&["solve", "--dmax", "1", s(&inst)]);
    assert_eq!(out.status.code(), Some(1));
    let diag = stdout_json(&out);
    assert_eq!(diag["status"], "infeasible");
    assert_eq!(diag["witness"], serde_json::json!({"node": 0, "type": 0}));
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(sfc(&["solve"]).status.code(), Some(2));
    assert_eq!(sfc(&["solve", "--algorithm", "greedy", "x.json"]).status.code(), Some(2));
    assert_eq!(sfc(&["solve", "/no/such/file.json"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let garbage = write(&dir, "g.json", "{nodes: oops");
    assert_eq!(sfc(&["solve", s(&garbage)]).status.code(), Some(2));
    let cfg = write(&dir, "cfg.json", r#"{"generator": {"link_count": 1000}}"#);
    let out_dir = dir.path().join("out");
    assert_eq!(
        sfc(&["suite", "--config", s(&cfg), "--out", s(&out_dir)]).status.code(),
        Some(2)
    );
}

#[test]
fn export_lp_rows() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "inst.json", PATH3);
    let out = sfc(&["export-lp", "--dmax", "1", s(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    let lp = String::from_utf8(out.stdout).unwrap();
    assert!(lp.contains(" pool_0_0_1: x_1_0 - 10000 y_0_0_1 >= -9999\n"));
    assert!(lp.contains(" hops_0_0_2: 10000 y_0_0_2 <= 9999\n"));

    let lit = dir.path().join("lit.lp");
    let out = sfc(&["export-lp", "--literal-eq2", "--big-m", "100", "--out", s(&lit), s(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    let lp = std::fs::read_to_string(&lit).unwrap();
    assert!(lp.contains(" onehost_1_0: y_1_0_0 + y_1_0_1 + y_1_0_2 = 1\n"));
    assert!(lp.contains(" pool_1_0_0: x_0_0 - 100 y_1_0_0 >= -100\n"));

    let out = sfc(&["export-lp", "--big-m", "0", s(&inst)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suite_writes_outputs() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("results");
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/reference.json");
    let out = sfc(&["suite", "--config", cfg, "--seed", "3", "--out", s(&out_dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("scenario,utilization,algorithm,total_backups,unprotected,mean_sync_hops,max_sync_hops,runtime_ms,optimal")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 24);
    assert!(rows[0].starts_with("s1,"));
    assert!(rows[0].contains(",pull,"));
    assert!(rows[23].starts_with("s8,"));
    assert!(rows[23].contains(",exact,"));
    let config: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(config["generator"]["seed"], 3);
    for f in ["results.json", "scenarios.csv", "network.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn generated_instance_round_trip() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("s3.json");
    let out = sfc(&["generate", "--seed", "5", "--scenario", "2", "--out", s(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    let plan = dir.path().join("plan.json");
    for alg in ["pull", "push", "exact"] {
        let out = sfc(&["solve", "--algorithm", alg, "--out", s(&plan), s(&inst)]);
        assert_eq!(out.status.code(), Some(0), "{alg}");
        let out = sfc(&["verify", s(&inst), s(&plan)]);
        assert_eq!(out.status.code(), Some(0), "{alg}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn allocation_modes_give_same_plan() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("s5.json");
    assert!(sfc(&["generate", "--seed", "2", "--scenario", "4", "--out", s(&inst)]).status.success());
    let pool = sfc(&["solve", "--algorithm", "push", "--allocation-mode", "pool", s(&inst)]);
    let fresh = sfc(&["solve", "--algorithm", "push", "--allocation-mode", "fresh", s(&inst)]);
    assert!(pool.status.success() && fresh.status.success());
    assert_eq!(pool.stdout, fresh.stdout);
}

#[test]
fn chains_instance_is_embedded() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        &dir,
        "chains.json",
        r#"{"nodes":4,"capacities":[3,3,3,3],"links":[[0,1],[1,2],[2,3],[3,0]],"types":2,
            "chains":[{"id":1,"types":[0,1,0],"src":0,"dst":2},{"id":2,"types":[1],"src":3,"dst":3}]}"#,
    );
    let out = sfc(&["solve", s(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    let plan = stdout_json(&out);
    let total: u64 = plan["x"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|row| row.as_array().unwrap())
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert!(total >= 2);
    assert_eq!(plan["unprotected"], serde_json::json!([]));
}
