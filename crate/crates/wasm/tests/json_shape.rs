//! The page reads these fields by name, so their shape is part of the contract.

use serde_json::Value;
use workbench_wasm::{cache_report, interval_report, solve_report};

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn cache_sites_carry_every_column() {
    let src = "int n;\nwhile (n > 0) { access(a); access(b); n = n - 1; }\n";
    for init in ["empty", "unknown"] {
        let v = parse(&cache_report(src, false, 2, init).unwrap());
        for site in v["sites"].as_array().unwrap() {
            for key in ["site", "location", "block", "approx", "verdict", "method", "oracle"] {
                assert!(site.get(key).is_some(), "{key} missing in {site}");
            }
            assert_eq!(site["verdict"], site["oracle"]);
        }
    }
}

#[test]
fn interval_rows_follow_locations() {
    let src = "int x;\nx = 0;\nwhile (x < 10) x = x + 1;\nassert (x == 10);\n";
    for method in ["widen", "widen-narrow", "policy", "exhaustive"] {
        let v = parse(&interval_report(src, "", method, "off").unwrap());
        assert_eq!(v["method"], method);
        let locs = v["locations"].as_array().unwrap();
        assert!(locs.iter().all(|l| l["values"]["x"].is_string()));
        // One simultaneous narrowing pass leaves the exit at [10, +oo).
        let proved = v["asserts"][0]["proved"].as_bool().unwrap();
        assert_eq!(proved, method == "policy" || method == "exhaustive", "{method}");
    }
    let v = parse(&interval_report(src, "", "widen", "truncated:2").unwrap());
    assert_eq!(v["method"], "widen+rewrites:truncated:2");
}

#[test]
fn errors_are_messages() {
    let e = interval_report("int x;\nx = ;", "", "widen", "off").unwrap_err();
    assert!(e.starts_with("2:5"), "{e}");
    assert!(interval_report("int x;", "", "magic", "off").is_err());
    assert!(solve_report("a = min(").is_err());
}

#[test]
fn solver_report_on_cycle() {
    let v = parse(&solve_report("a = max(0, b + 1)\nb = min(a, 7)").unwrap());
    assert_eq!(v["agree"], true);
    assert_eq!(v["policy"], serde_json::json!([["a", "8"], ["b", "7"]]));
}
