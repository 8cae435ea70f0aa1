//! The `workbench` binary on the sample inputs: reports, exit codes, formats.

use std::path::PathBuf;
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use workbench_core::ir::render_access_graph;
use workbench_core::random::access_cfg;

fn inputs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../inputs")
}

fn workbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_workbench")).current_dir(inputs()).args(args).output().unwrap()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = workbench(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (v, out.status.code().unwrap())
}

fn column<'a>(v: &'a Value, section: &str, key: &str) -> Vec<&'a Value> {
    v[section].as_array().unwrap().iter().map(|r| &r[key]).collect()
}

#[test]
fn flag_program_exact_and_oracle_tables() {
    let (exact, code) = json(&["cache", "flag.toy", "--method", "exact", "--assoc", "4"]);
    assert_eq!(code, 0);
    let verdicts: Vec<&str> = column(&exact, "results", "verdict").iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(verdicts, ["always-miss", "always-miss", "variable", "variable"]);
    let (oracle, _) = json(&["cache", "flag.toy", "--method", "oracle", "--assoc", "4"]);
    assert_eq!(column(&oracle, "results", "verdict"), column(&exact, "results", "verdict"));
    assert_eq!(column(&oracle, "results", "method")[0], "oracle");
}

#[test]
fn pipeline_tags_methods() {
    let (v, _) = json(&["cache", "flag.toy"]);
    let methods: Vec<&str> = column(&v, "results", "method").iter().map(|m| m.as_str().unwrap()).collect();
    assert_eq!(methods, ["approx", "approx", "exact", "exact"]);
    assert_eq!(v["params"]["exact_blocks"], "a,b");
}

#[test]
fn report_schema() {
    let (v, _) = json(&["cache", "loop_nest.ag", "--method", "approx"]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["tool"], "workbench");
    for k in ["version", "method", "input", "results", "timings"] {
        assert!(v.get(k).is_some(), "{k}");
    }
    assert_eq!(v["timings"], serde_json::json!({}));
    let (t, _) = json(&["cache", "loop_nest.ag", "--timings"]);
    assert!(t["timings"].get("approx").is_some() && t["timings"].get("exact").is_some());
}

#[test]
fn exit_codes() {
    assert_eq!(workbench(&["cache", "missing.toy"]).status.code(), Some(1));
    assert_eq!(workbench(&["cache", "flag.toy", "--assoc", "0"]).status.code(), Some(1));
    assert_eq!(workbench(&["cache", "flag.toy", "--method", "oracle", "--budget", "2"]).status.code(), Some(2));
    assert_eq!(workbench(&["intervals", "loop_nest.ag"]).status.code(), Some(1));
    assert_eq!(workbench(&["intervals", "copy_diff.toy", "--method", "policy", "--var", "z"]).status.code(), Some(1));
    assert_eq!(workbench(&["intervals", "copy_diff.toy", "--method", "policy"]).status.code(), Some(1));
    assert_eq!(workbench(&["intervals", "trigger.toy", "--method", "policy", "--rewrites", "full"]).status.code(), Some(1));
    assert_eq!(workbench(&["intervals", "trigger.toy", "--method", "oracle"]).status.code(), Some(1));
    assert_eq!(workbench(&["intervals", "trigger.toy", "--method", "exhaustive", "--entry", "i=0", "--split-cap", "1"]).status.code(), Some(2));
    let out = workbench(&["intervals", "nope.toy"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toy"));
}

fn head_row(v: &Value) -> &Value {
    v["results"].as_array().unwrap().iter().find(|r| r["kind"] == "loop-head").unwrap()
}

#[test]
fn trigger_loop_methods() {
    let (v, code) = json(&["intervals", "trigger.toy", "--method", "widen-narrow", "--entry", "i=0"]);
    assert_eq!((head_row(&v)["i"].as_str(), code), (Some("[0, 999]"), 3));
    assert_eq!(v["asserts"][0]["verdict"], "unproved");
    let (v, code) = json(&["intervals", "trigger.toy", "--method", "widen", "--entry", "i=0"]);
    assert_eq!((head_row(&v)["i"].as_str(), code), (Some("[0, +oo]"), 3));
    for method in ["policy", "exhaustive", "oracle"] {
        let (v, code) = json(&["intervals", "trigger.toy", "--method", method, "--entry", "i=0", "--range", "-5:2000"]);
        assert_eq!((head_row(&v)["i"].as_str(), code), (Some("[0, 42]"), 0), "{method}");
        assert_eq!(v["asserts"][0]["verdict"], "proved");
    }
    let (v, code) = json(&["intervals", "trigger_init.toy", "--method", "policy"]);
    assert_eq!((head_row(&v)["i"].as_str(), code), (Some("[0, 42]"), 0));
}

#[test]
fn rewrites_flag() {
    let last_z = |v: &Value| v["results"].as_array().unwrap().last().unwrap()["z"].clone();
    let (v, code) = json(&["intervals", "copy_diff.toy", "--entry", "x=0:1", "--rewrites", "full"]);
    assert_eq!((last_z(&v), code), (Value::from("[0, 0]"), 0));
    assert_eq!(v["method"], "widen-narrow+rewrites:full");
    let (v, code) = json(&["intervals", "copy_diff.toy", "--entry", "x=0:1"]);
    assert_eq!(code, 3);
    let z_after_assign = &v["results"][2]["z"];
    assert_eq!(z_after_assign, "[-1, 1]");
    let (v, _) = json(&["intervals", "forget.toy", "--rewrites", "truncated:1"]);
    let l: Vec<&str> = column(&v, "results", "l").iter().map(|x| x.as_str().unwrap()).collect();
    assert!(l.contains(&"[2, +oo]"), "{l:?}");
}

#[test]
fn compare_intervals_lists_disagreements() {
    let (v, code) = json(&["compare-intervals", "trigger.toy", "--entry", "i=0"]);
    assert_eq!(code, 0);
    let issues: Vec<&str> = column(&v, "disagreements", "issue").iter().map(|x| x.as_str().unwrap()).collect();
    assert!(!issues.is_empty() && issues.iter().all(|i| *i == "imprecise"), "{issues:?}");
    let head = head_row(&v);
    assert_eq!((head["widen-narrow"].as_str(), head["policy"].as_str(), head["oracle"].as_str()), (Some("[0, 999]"), Some("[0, 42]"), Some("[0, 42]")));
    let (v, _) = json(&["compare-intervals", "copy_diff.toy", "--entry", "x=0:1", "--entry", "y=0", "--entry", "z=0"]);
    assert!(v["params"]["policy"].as_str().unwrap().starts_with("n/a"));
    assert_eq!(v["asserts"][0]["rewrites"], "proved");
    assert_eq!(v["asserts"][0]["widen-narrow"], "unproved");
}

#[test]
fn text_output_is_aligned() {
    let out = workbench(&["cache", "flag.toy", "--method", "exact"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let table: Vec<&str> = text.lines().skip(3).collect();
    assert!(table[0].starts_with("site  location  block  verdict"));
    let col = table[0].find("verdict").unwrap();
    assert!(table[1..].iter().all(|l| l[col..].starts_with("always-miss") || l[col..].starts_with("variable")));
}

/// The exact column never claims more than the oracle, and approx/exact
/// disagreements are all listed.
#[test]
fn compare_cache_on_random_graphs() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..40 {
        let g = access_cfg(&mut rng, 10, 5);
        let path = dir.join(format!("random{i}.ag"));
        std::fs::write(&path, render_access_graph(&g)).unwrap();
        for init in ["empty", "unknown"] {
            let p = path.to_str().unwrap();
            let out = workbench_cli::run(["workbench", "compare-cache", p, "--assoc", "2", "--init", init, "--format", "json"]);
            assert_eq!(out.code, 0, "{}", out.stderr);
            let v: Value = serde_json::from_str(&out.stdout).unwrap();
            let rows = v["results"].as_array().unwrap();
            let dis = v["disagreements"].as_array().unwrap();
            assert!(dis.iter().all(|d| d["issue"] != "contradiction"), "{dis:?}");
            let differing = rows.iter().filter(|r| r["approx"] != r["exact"]).count();
            assert_eq!(differing, dis.len());
            assert!(rows.iter().all(|r| r["exact"] == r["oracle"] && r["pipeline"] == r["exact"]));
        }
    }
}
