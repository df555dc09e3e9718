use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gcdkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcdkit")).args(args).env_remove("GCDKIT_WORKERS").output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    gcdkit(args).status.code().unwrap()
}

fn fixture(p: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(p).to_str().unwrap().to_string()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn overlap_rows_agree_exactly() {
    let o = gcdkit(&["overlap", "--alpha", "9/2", "--beta", "2", "--T", "1e3,1e4"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["schema"], "overlap-report/1");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["direct"] == r["sj_formula"]));
}

#[test]
fn overlap_bracket_one_is_disjoint() {
    let v = json(&gcdkit(&["overlap", "--alpha", "3", "--beta", "2", "--T", "1000"]));
    assert_eq!(v["rows"][0]["disjoint"], true);
    assert_eq!(v["rows"][0]["direct"], "0");
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(code(&["overlap", "--alpha", "4", "--beta", "2", "--T", "1000"]), 2);
    assert_eq!(code(&["overlap", "--alpha", "x", "--beta", "2", "--T", "1000"]), 2);
    assert_eq!(code(&["pipeline", "--instance", "no-such-instance"]), 2);
    assert_eq!(code(&["graph", "validate", "/nonexistent.json"]), 2);
    assert_eq!(code(&["behrend", "--set", "squares:10", "--y", "2", "--z", "10"]), 2);
}

#[test]
fn sample_graphs_validate() {
    let dir = PathBuf::from(fixture("graphs"));
    let mut n = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let p = p.to_str().unwrap();
        for cmd in ["validate", "quality", "maximal", "structure"] {
            assert_eq!(code(&["graph", cmd, p]), 0, "{cmd} {p}");
        }
        n += 1;
    }
    assert!(n >= 3);
}

#[test]
fn graph_reports_carry_schema() {
    let v = json(&gcdkit(&["graph", "quality", &fixture("graphs/square.json"), "--theta", "5/2"]));
    assert_eq!(v["schema"], "graph-quality/1");
    assert_eq!(v["theta"], "5/2");
    assert_eq!(v["density"].as_str().unwrap().contains('/'), true);
}

#[test]
fn pipeline_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&["pipeline", "--instance", "small-two", "--out", out]), 0);
    let trace = dir.path().join("trace.json");
    assert_eq!(code(&["verify-trace", trace.to_str().unwrap()]), 0);
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t["schema"], "pipeline-trace/1");
    assert_eq!(t["completed"], true);
}

#[test]
fn tampered_trace_exits_one() {
    assert_eq!(code(&["verify-trace", &fixture("traces/tampered-quality.json")]), 1);
}

#[test]
fn malformed_trace_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"schema\": \"pipeline-trace/1\"}").unwrap();
    assert_eq!(code(&["verify-trace", p.to_str().unwrap()]), 2);
}

#[test]
fn reports_are_deterministic() {
    let a = gcdkit(&["pipeline", "--instance", "wide"]).stdout;
    let b = gcdkit(&["pipeline", "--instance", "wide", "--workers", "1"]).stdout;
    assert_eq!(a, b);
    let a = gcdkit(&["overlap", "--random", "4", "--T", "500", "--seed", "9"]).stdout;
    let b = gcdkit(&["overlap", "--random", "4", "--T", "500", "--seed", "9"]).stdout;
    assert_eq!(a, b);
    let c = gcdkit(&["overlap", "--random", "4", "--T", "500", "--seed", "10"]).stdout;
    assert_ne!(a, c);
}

#[test]
fn config_files_fill_missing_flags() {
    let o = gcdkit(&["overlap", "--config", &fixture("config/overlap.toml")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["rows"].as_array().unwrap().len(), 2);
    let o = gcdkit(&["overlap", "--config", &fixture("config/overlap.toml"), "--T", "100"]);
    assert_eq!(json(&o)["rows"].as_array().unwrap().len(), 1);
    assert_eq!(code(&["pipeline", "--config", &fixture("config/pipeline.json")]), 0);
}

#[test]
fn out_dir_gets_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&["behrend", "--set", "primes:500", "--weight", "one", "--y", "10", "--z", "500", "--out", out]), 0);
    let csv = std::fs::read_to_string(dir.path().join("behrend.csv")).unwrap();
    assert!(csv.starts_with("lhs,terms,rhs_shape,ratio\n"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("behrend.json")).unwrap()).unwrap();
    assert_eq!(v["schema"], "behrend-report/1");
}

#[test]
fn aprime_trace_from_values() {
    let o = gcdkit(&["aprime", "--values", "5/2,7/2,9/2,11/2,13/2", "--c", "1/20", "--levels", "2", "--x1-start", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["schema"], "aprime-trace/1");
    assert!(v["trace"]["levels"].is_array());
}

#[test]
fn sample_corpus_round_trips() {
    let o = gcdkit(&["graph", "sample", "--count", "3", "--seed", "4"]);
    let v = json(&o);
    assert_eq!(v["schema"], "gcd-graph-corpus/1");
    for g in v["graphs"].as_array().unwrap() {
        let parsed: gcd_graph::GcdGraph = serde_json::from_value(g.clone()).unwrap();
        assert_eq!(&serde_json::to_value(&parsed).unwrap(), g);
    }
}
