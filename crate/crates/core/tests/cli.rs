use std::process::{Command, Output};

fn dp6(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dp6"))
        .args(args)
        .env_remove("DP6_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const TABLE: &str = "6L-2E1-2E2-2E3-2E4-2E5-2E6";

#[test]
fn compute_gromov_witten_default() {
    let o = dp6(&["compute", "--D", TABLE, "--g", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3240\n");
}

#[test]
fn compute_line_with_explicit_beta() {
    let o = dp6(&["compute", "--D", "L", "--g", "0", "--beta", "1:2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn weight_mismatch_exits_2() {
    let o = dp6(&["compute", "--D", "L", "--g", "0", "--beta", "1:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Iα+Iβ=1 ≠ DE=2"), "{}", stderr(&o));
}

#[test]
fn malformed_input_exits_2() {
    for args in [
        vec!["table", "--D", "6X"],
        vec!["compute", "--D", "L", "--g", "zero"],
        vec!["compute", "--D", "L", "--g", "0", "--beta", "2:1,1:1"],
        vec!["compute", "--D", "L-E1-E1", "--g", "0"],
        vec!["compute", "--D", "L", "--g", "0", "--genus-offset", "0"],
        vec!["compute", "--D", "L"],
    ] {
        assert_eq!(dp6(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn out_of_range_genus_warns() {
    let o = dp6(&["compute", "--D", "3L", "--g", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0\n");
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn table_csv_and_json() {
    let o = dp6(&["table", "--D", TABLE]);
    assert_eq!(stdout(&o), "g,value\n0,3240\n1,1740\n2,369\n3,33\n4,1\n");
    let o = dp6(&["table", "--D", "L", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"], serde_json::json!([{"g": 0, "value": "1"}]));
}

#[test]
fn json_schema() {
    let o = dp6(&["compute", "--D", "3L", "--g", "0", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["query"], "3L|g=0|a=|b=1:6");
    assert_eq!(v["engine"], "general");
    assert_eq!(v["genus_offset"], -1);
    assert_eq!(v["value"], "12");
    for k in ["memo_hits", "memo_size", "splittings_enumerated", "wall_ms"] {
        assert!(v["stats"][k].is_u64(), "{k}");
    }
    let back = serde_json::to_string(&v).unwrap();
    assert_eq!(serde_json::from_str::<serde_json::Value>(&back).unwrap(), v);
}

#[test]
fn genus_all_lists_every_genus() {
    let o = dp6(&["compute", "--D", "3L", "--g", "all"]);
    assert_eq!(stdout(&o), "g=0 12\ng=1 1\n");
}

#[test]
fn genus0_engine_matches() {
    let o = dp6(&["compute", "--D", TABLE, "--g", "0", "--engine", "genus0"]);
    assert_eq!(stdout(&o), "3240\n");
    let o = dp6(&["compute", "--D", "3L", "--g", "1", "--engine", "genus0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["trace", "--D", "3L-E1-E2-E3-E4", "--g", "0", "--alpha", "1:2", "--beta", ""];
    assert_eq!(stdout(&dp6(&args)), stdout(&dp6(&args)));
    let args = ["compute", "--D", TABLE, "--g", "all", "--threads", "2"];
    let a = stdout(&dp6(&args));
    assert_eq!(a, stdout(&dp6(&["compute", "--D", TABLE, "--g", "all"])));
}

#[test]
fn trace_records() {
    let o = dp6(&["trace", "--D", "L", "--g", "0", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let recs = v["records"].as_array().unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["kind"], "first_sum");

    let o = dp6(&["trace", "--D", "E1", "--g", "0", "--beta", "1:1", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 1);
    assert_eq!(v["records"][0]["kind"], "base");

    let o = dp6(&["trace", "--D", "3L-E1-E2-E3-E4", "--g", "0", "--alpha", "1:2", "--beta", "", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let found = v["records"].as_array().unwrap().iter().any(|r| {
        r["kind"] == "splitting"
            && r["k"] == 0
            && r["alpha_multinomial"] == "2"
            && r["parts"].as_array().unwrap().iter().any(|p| p["key"] == "E5|g=0|a=|b=1:1")
    });
    assert!(found, "{v}");
}

#[test]
fn cache_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("memo.txt");
    let p = path.to_str().unwrap();
    let first = dp6(&["compute", "--D", TABLE, "--g", "1", "--cache", p]);
    assert_eq!(stdout(&first), "1740\n");
    let bytes = std::fs::read(&path).unwrap();
    assert!(bytes.starts_with(b"dp6cache v1 offset=-1 engine=general\n"));
    let warm = Command::new(env!("CARGO_BIN_EXE_dp6"))
        .args(["compute", "--D", TABLE, "--g", "1", "--json"])
        .env("DP6_CACHE", p)
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&warm)).unwrap();
    assert_eq!(v["value"], "1740");
    assert_eq!(v["stats"]["splittings_enumerated"], 0);
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
    let mismatch = dp6(&["compute", "--D", "3L", "--g", "0", "--cache", p, "--genus-offset", "+1"]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn corrupt_cache_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("memo.txt");
    std::fs::write(&path, "dp6cache v1 offset=-1 engine=general\nL|g=0|a=|b=1:2=1\nL|g=0|a=|b=1:2=2\n").unwrap();
    let o = dp6(&["compute", "--D", "L", "--g", "0", "--cache", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_quick_passes() {
    let o = dp6(&["verify", "--suite", "quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.contains("PASS")).count(), 10);
}
