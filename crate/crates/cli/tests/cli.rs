use std::path::PathBuf;
use std::process::{Command, Output};

fn luinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_luinv")).args(args).output().expect("run luinv")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("luinv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

const GHZ3: &str = r#"{"dims":[2,2,2],"coeffs":[[0.7071067811865476,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0.7071067811865476,0]]}"#;

#[test]
fn count_golden_json() {
    let out = luinv(&["count", "--k", "3", "--max-m", "4", "--format", "json", "--seed", "7"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["k"], 3);
    assert_eq!(v["dims"], serde_json::json!([1, 4, 11, 43]));
    assert_eq!(v["connected"], serde_json::json!([1, 3, 7, 26]));
    assert_eq!(v["header"]["seed"], 7);
    assert_eq!(v["header"]["budget"], 1_000_000_000u64);
    assert_eq!(v["header"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn count_large_degree_is_exact() {
    let out = luinv(&["count", "--k", "4", "--max-m", "12", "--format", "csv", "--budget", "1000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# luinv"));
    assert!(text.contains("\n1,1,1,true\n"));
    assert!(text.contains("\n4,681,604,false\n"));
}

#[test]
fn orbits_counts_and_dot() {
    let all = json(&luinv(&["orbits", "--k", "3", "--m", "2", "--format", "json"]));
    assert_eq!(all["count"], 4);
    let connected = json(&luinv(&["orbits", "--k", "3", "--m", "2", "--connected", "--format", "json"]));
    assert_eq!(connected["count"], 3);
    assert!(connected["orbits"].as_array().unwrap().iter().all(|o| o["connected"] == true));

    let dot = stdout(&luinv(&["orbits", "--k", "3", "--m", "2", "--connected", "--format", "dot"]));
    assert_eq!(dot.matches("digraph").count(), 3);
    assert_eq!(dot.matches("->").count(), 12);
}

#[test]
fn full_degree_doubles() {
    let v = json(&luinv(&["orbits", "--k", "2", "--m", "3", "--format", "json", "--full-degree"]));
    assert!(v["orbits"].as_array().unwrap().iter().all(|o| o["degree"] == 6));
}

#[test]
fn eval_ghz() {
    let state = temp_file("ghz.json", GHZ3);
    let orbit = temp_file("orbit.json", r#"{"k":3,"m":2,"perms":[[2,1],[1,2]]}"#);
    let out = luinv(&["eval", "--state", state.to_str().unwrap(), "--orbit", orbit.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let value = json(&out)["value"].clone();
    assert!((value[0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(value[1].as_f64().unwrap().abs() < 1e-12);

    let plain = stdout(&luinv(&["eval", "--state", state.to_str().unwrap(), "--orbit", orbit.to_str().unwrap()]));
    let last = plain.lines().last().unwrap();
    assert!(last.starts_with("[0.5") && last.ends_with(", 0.0]"), "{last}");
}

#[test]
fn eval_mixed_kind_on_projector() {
    let state = temp_file("ghz-m.json", GHZ3);
    let orbit = temp_file("orbit-m.json", r#"{"k":3,"m":2,"perms":[[2,1],[1,2],[1,2]],"kind":"mixed"}"#);
    let out = luinv(&["eval", "--state", state.to_str().unwrap(), "--orbit", orbit.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    assert!((json(&out)["value"][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn eval_error_codes() {
    let state = temp_file("ghz-e.json", GHZ3);
    let s = state.to_str().unwrap();
    let wrong_arity = temp_file("arity.json", r#"{"k":2,"m":2,"perms":[[2,1]]}"#);
    assert_eq!(luinv(&["eval", "--state", s, "--orbit", wrong_arity.to_str().unwrap()]).status.code(), Some(4));
    let garbage = temp_file("garbage.json", "{not json");
    assert_eq!(luinv(&["eval", "--state", s, "--orbit", garbage.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(luinv(&["eval", "--state", "/nonexistent/state.json", "--orbit", s]).status.code(), Some(3));
}

#[test]
fn factor_disconnected() {
    let orbit = temp_file("factor.json", r#"{"k":3,"m":3,"perms":[[1,2,3],[2,1,3]]}"#);
    let v = json(&luinv(&["factor", "--orbit", orbit.to_str().unwrap(), "--format", "json"]));
    assert_eq!(v["connected"], false);
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    let degrees: Vec<u64> = comps.iter().map(|c| c["degree"].as_u64().unwrap()).collect();
    assert_eq!(degrees, vec![1, 2]);

    let identity = temp_file("identity.json", r#"{"k":2,"m":3,"perms":[[1,2,3]]}"#);
    let v = json(&luinv(&["factor", "--orbit", identity.to_str().unwrap(), "--format", "json"]));
    assert_eq!(v["components"][0]["multiplicity"], 3);
}

#[test]
fn verify_refuses_below_stable_range() {
    let out = luinv(&["verify", "--suite", "basis", "--k", "3", "--m", "3", "--shape", "2,2,2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_diagnostic_below_stable_range() {
    let out = luinv(&["verify", "--suite", "basis", "--k", "3", "--m", "3", "--shape", "2,2,2", "--diagnostic", "--format", "json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["checks"][0]["name"], "basis_rank_diagnostic");
}

#[test]
fn verify_all_passes_and_writes_report() {
    let report = std::env::temp_dir().join(format!("luinv-report-{}.json", std::process::id()));
    let out = luinv(&[
        "verify", "--all", "--k", "3", "--max-m", "2", "--shape", "2,2,2", "--trials", "5", "--seed", "11",
        "--report", report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(!text.contains("FAIL"));
    let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved["passed"], true);
    assert_eq!(saved["header"]["seed"], 11);
}

#[test]
fn verify_impossible_tolerance_fails() {
    let out = luinv(&["verify", "--suite", "invariance", "--k", "2", "--m", "2", "--shape", "2,2", "--tol", "invariance=0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_budget_exceeded() {
    let out = luinv(&["verify", "--suite", "invariance", "--k", "3", "--m", "3", "--shape", "3,3,3", "--budget", "10"]);
    assert_eq!(out.status.code(), Some(2));
}
