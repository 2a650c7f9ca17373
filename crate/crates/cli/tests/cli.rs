use std::process::{Command, Output};

use serde_json::Value;

fn uomkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uomkit")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = uomkit(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    (code(&out), v)
}

#[test]
fn verify_reports_uom_and_balance() {
    let (c, v) = json(&["verify", "uom-19x7"]);
    assert_eq!(c, 0);
    assert_eq!((v["m"].as_u64(), v["n"].as_u64(), v["uom"].as_bool()), (Some(19), Some(7), Some(true)));
    let (c, v) = json(&["verify", "uom-6x4"]);
    assert_eq!(c, 0);
    assert_eq!(v["balanced"], false);
    assert_eq!(v["diagnostics"]["mu_bound"], true);
}

#[test]
fn verify_fails_on_non_orthogonal_and_extendible() {
    let (c, v) = json(&["verify", "ab, ac"]);
    assert_eq!((c, &v["orthogonal"]), (1, &Value::Bool(false)));
    let (c, v) = json(&["verify", "ab, aB"]);
    assert_eq!((c, &v["uom"]), (1, &Value::Bool(false)));
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(code(&uomkit(&["verify", "ab, abc"])), 2);
    assert_eq!(code(&uomkit(&["catalog", "get", "no-such-entry"])), 2);
    assert_eq!(code(&uomkit(&["pptes", "uom-7x4", "--drop", "0"])), 2);
    assert_eq!(code(&uomkit(&["pptes", "uom-7x4", "--tol", "bogus=1"])), 2);
    let out = uomkit(&["verify", "ab, a-"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2, column 1"));
}

#[test]
fn reads_text_and_json_files() {
    let dir = std::env::temp_dir().join(format!("uomkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let text = dir.join("x.txt");
    std::fs::write(&text, "aaa\nAbb\nbAB\nBBA\n").unwrap();
    let (c, v) = json(&["verify", text.to_str().unwrap()]);
    assert_eq!((c, &v["uom"]), (0, &Value::Bool(true)));
    let (_, canon) = json(&["canon", text.to_str().unwrap()]);
    let js = dir.join("x.json");
    let (_, got) = json(&["catalog", "get", "uom-4x3"]);
    std::fs::write(&js, got["entry"]["matrix"].to_string()).unwrap();
    let (c, _) = json(&["equiv", js.to_str().unwrap(), text.to_str().unwrap()]);
    assert_eq!(c, 0);
    let (_, canon2) = json(&["canon", js.to_str().unwrap()]);
    assert_eq!(canon["code"], canon2["code"]);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn extend_lists_completions() {
    let (_, v) = json(&["extend", "uom-6x4-minus-first", "--all"]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 16);
    assert_eq!(v["max_mutually_orthogonal"], 11);
    let (_, v) = json(&["extend", "uom-6x4"]);
    assert_eq!(v["row"], Value::Null);
}

#[test]
fn equiv_exit_code_tracks_verdict() {
    assert_eq!(code(&uomkit(&["equiv", "uom-8x7-1", "uom-8x7-2"])), 1);
    assert_eq!(code(&uomkit(&["equiv", "doubling-seed-4x3", "uom-4x3"])), 0);
}

#[test]
fn classes_counts_and_budget() {
    for (m, n, want) in [("4", "2", 2), ("4", "3", 1), ("6", "4", 1)] {
        let (c, v) = json(&["classes", m, n]);
        assert_eq!((c, v["count"].as_u64()), (0, Some(want)));
    }
    let (c, v) = json(&["classes", "8", "4", "--budget", "0.2"]);
    assert_eq!((c, &v["complete"]), (3, &Value::Bool(false)));
}

#[test]
fn constructions() {
    let (_, v) = json(&["construct", "genshift", "5"]);
    assert_eq!(v["uom"], true);
    let g5 = v["matrix"].as_str().unwrap().replace('\n', ",");
    assert_eq!(code(&uomkit(&["equiv", &g5, "genshift-6x5"])), 0);
    let (_, v) = json(&["construct", "double", "doubling-seed-4x3", "--family", "coset:(12):cyclic:(1234)"]);
    let z = v["matrix"].as_str().unwrap().replace('\n', ",");
    assert_eq!(code(&uomkit(&["equiv", &z, "uom-8x7-5"])), 0);
    let (_, v) = json(&["construct", "compose", "a, A", "uom-4x3", "uom-4x3", "--disjoint"]);
    assert_eq!((v["m"].as_u64(), v["uom"].as_bool()), (Some(8), Some(true)));
    let (_, v) = json(&["construct", "lift", "lift-source-3x3", "--split", "2", "--y1", "aa, Ab, aA, AB"]);
    let y = v["matrix"].as_str().unwrap().replace('\n', ",");
    assert_eq!(code(&uomkit(&["equiv", &y, "lift-result-8x3"])), 0);
    let out = uomkit(&["construct", "genshift", "4"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn order_status() {
    let (_, v) = json(&["order", "status", "irreducible-8x4"]);
    assert_eq!(v["maximal"], true);
}

#[test]
fn pptes_single_and_sweep() {
    let (c, v) = json(&["pptes", "uom-7x4", "--drop", "1"]);
    assert_eq!(c, 0);
    assert_eq!((v["rank"].as_u64(), v["s"].as_u64(), v["verdict"].as_str()), (Some(10), Some(3), Some("Entangled")));
    let (_, v) = json(&["pptes", "uom-6x4", "--drop", "1"]);
    assert_eq!(v["verdict"], "SeparableNumerical");
    let (_, v) = json(&["pptes", "uom-7x4", "--sweep"]);
    let pairs: Vec<(u64, u64)> = v["entangled_pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p["rank"].as_u64().unwrap(), p["s"].as_u64().unwrap()))
        .collect();
    assert_eq!(pairs, [(10, 3), (10, 6), (10, 7), (10, 8)]);
    let (_, v) = json(&["pptes", "pyramid", "--drop", "5"]);
    assert_eq!((v["rank"].as_u64(), v["s"].as_u64()), (Some(5), Some(6)));
}

#[test]
fn json_is_byte_stable() {
    let a = uomkit(&["pptes", "uom-6x4", "--drop", "2", "--seed", "7", "--json"]);
    let b = uomkit(&["pptes", "uom-6x4", "--drop", "2", "--seed", "7", "--json"]);
    assert_eq!(a.stdout, b.stdout);
    let c = uomkit(&["pptes", "uom-6x4", "--drop", "2", "--seed", "8", "--json"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn catalog_and_theta() {
    let (c, v) = json(&["catalog", "self-test"]);
    assert_eq!((c, &v["passed"]), (0, &Value::Bool(true)));
    let (_, v) = json(&["catalog", "list"]);
    assert!(v.as_array().unwrap().iter().any(|e| e["name"] == "pyramid"));
    let (_, v) = json(&["theta", "4"]);
    assert_eq!(v["theta"], 6);
    assert_eq!(code(&uomkit(&["theta", "0"])), 2);
}
