//! Runs the binary on the fixtures in `tests/data`.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_raag-sep"))
        .args(args)
        .output()
        .expect("binary runs");
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

#[test]
fn separate_e2() {
    let (code, v) = run(&["separate", "-g", &data("zz.graph"), "-z", &data("aloop.cplx"), "-w", "b"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["index"], 2);
    assert_eq!(v["bound"], 2);
    assert_eq!(v["verified"], true);
    assert_eq!(v["cover"]["permutations"], serde_json::json!([[0, 1], [1, 0]]));
}

#[test]
fn oracle_z3() {
    let (code, v) = run(&["oracle", "-g", &data("z.graph"), "--gens", "v v v", "-w", "v", "--max", "6"]);
    assert_eq!(code, 0);
    assert_eq!(v["min_index"], 3);
}

#[test]
fn normalize_cancels() {
    let (code, v) = run(&["normalize", "-g", &data("zz.graph"), "-w", "a a^-1"]);
    assert_eq!(code, 0);
    assert_eq!(v["normal_form"], serde_json::json!([]));
    assert_eq!(v["length"], 0);
    let (_, v) = run(&["normalize", "-g", &data("zz.graph"), "-w", "b a"]);
    assert_eq!(v["normal_form"], serde_json::json!(["a", "b"]));
}

#[test]
fn graph_line_resolves_next_to_the_complex() {
    let (code, v) = run(&["member", "-z", &data("z3.cplx"), "-w", "v v v"]);
    assert_eq!(code, 0);
    assert_eq!(v["member"], true);
    let (_, v) = run(&["member", "-z", &data("z3.cplx"), "-w", "v"]);
    assert_eq!(v["member"], false);
}

#[test]
fn exit_codes() {
    let (code, v) = run(&["normalize", "-g", &data("zz.graph"), "-w", "c"]);
    assert_eq!((code, v["error"].as_str()), (1, Some("input")));
    let (code, _) = run(&["separate", "-z", &data("z3.cplx"), "-w", "v v v"]);
    assert_eq!(code, 1);
    let (code, v) = run(&["check", "-z", &data("broken.cplx")]);
    assert_eq!((code, v["error"].as_str()), (2, Some("verification")));
    let (code, _) = run(&["member", "-z", &data("missing.cplx"), "-w", "v"]);
    assert_eq!(code, 1);
}

#[test]
fn theorem_a_writes_a_checkable_complex() {
    let dir = std::env::temp_dir().join(format!("raag-sep-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::copy(data("f2.graph"), dir.join("f2.graph")).unwrap();
    let y = dir.join("y.cplx").display().to_string();
    let (code, v) = run(&["theorem-a", "-z", &data("f2loop.cplx"), "-w", "b a", "--out", &y]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["within_bound"], true);
    let (code, v) = run(&["check", "-z", &y]);
    assert_eq!(code, 0);
    assert_eq!(v["local_isometry"], true);
    let c = dir.join("c.cplx").display().to_string();
    let (code, v) = run(&["complete", "-z", &y, "--out", &c]);
    assert_eq!(code, 0);
    let degree = v["degree"].as_u64().unwrap();
    let (code, v) = run(&["transversal", "-z", &c]);
    assert_eq!(code, 0);
    assert_eq!(v["transversal"].as_array().unwrap().len() as u64, degree);
    assert_eq!(v["transversal"][0], "ε");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn sep_growth_and_stallings() {
    let (code, v) = run(&["sep-growth", "-z", &data("z3.cplx"), "-n", "3", "--max", "6"]);
    assert_eq!(code, 0);
    assert_eq!(v["value"], 3);
    // v^±1, v^±2; v^±3 lie in the subgroup
    assert_eq!(v["entries"].as_array().unwrap().len(), 4);
    let (code, v) = run(&["separate", "-z", &data("f2loop.cplx"), "-w", "b a", "--stallings"]);
    assert_eq!(code, 0);
    assert_eq!(v["index"], 3);
    assert_eq!(v["bound"], 3);
}

#[test]
fn hull_of_two_points() {
    let (code, v) = run(&["hull", "-g", &data("zz.graph"), "-p", "a a", "-p", "b"]);
    assert_eq!(code, 0);
    assert_eq!(v["size"], 6);
    assert_eq!(v["interval_closed"], true);
}
