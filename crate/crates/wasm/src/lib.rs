//! Browser bindings. Every export takes plain strings and numbers and returns
//! a JSON document; errors come back as JavaScript strings.

use std::collections::BTreeMap;

use serde::Serialize;
use wasm_bindgen::prelude::*;
use workbench_core::bounds::{extract_upper_bounds, named, solve_exhaustive, solve_policy_iteration, BoundSystem, DEFAULT_SPLIT_CAP};
use workbench_core::cache::{analyze_approx, classify_approx, classify_oracle, classify_pipeline, ApproxClass, InitialCachePolicy};
use workbench_core::intervals::{analyze, check_asserts, AbstractEnv, Bound, Interval, IntervalResult, IterationOptions};
use workbench_core::ir::{build_cfg, parse_access_graph, parse_program, Cfg};
use workbench_core::symrewrite::{analyze_combined, RewriteMode};

const ORACLE_BUDGET: usize = 200_000;

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

fn load(source: &str, graph: bool) -> Result<Cfg, String> {
    if graph {
        parse_access_graph(source).map_err(|e| e.to_string())
    } else {
        parse_program(source).map(|p| build_cfg(&p)).map_err(|e| e.to_string())
    }
}

#[derive(Serialize)]
struct SiteRow {
    site: usize,
    location: String,
    block: String,
    approx: &'static str,
    verdict: &'static str,
    method: &'static str,
    oracle: Option<&'static str>,
}

#[derive(Serialize)]
struct CacheReport {
    sites: Vec<SiteRow>,
    exact_blocks: Vec<String>,
    oracle_note: Option<String>,
}

/// Pipeline classification of every access, next to the prefilter's verdict
/// and the explicit-state oracle.
pub fn cache_report(source: &str, graph: bool, assoc: usize, init: &str) -> Result<String, String> {
    if assoc == 0 {
        return Err("associativity must be at least 1".into());
    }
    let policy = match init {
        "empty" => InitialCachePolicy::Empty,
        "unknown" => InitialCachePolicy::Unknown,
        other => return Err(format!("unknown initial cache `{other}`")),
    };
    let g = load(source, graph)?;
    let bounds = analyze_approx(&g, assoc, policy);
    let pipe = classify_pipeline(&g, assoc, policy);
    let (oracle, oracle_note) = match classify_oracle(&g, assoc, policy, ORACLE_BUDGET) {
        Ok(o) => (Some(o), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let sites = g
        .access_sites()
        .iter()
        .map(|s| {
            let (c, m) = pipe.sites[&s.site];
            SiteRow {
                site: s.site.0,
                location: g.info(s.src).name.clone(),
                block: g.block_name(s.block).to_string(),
                approx: match classify_approx(bounds[s.src.0].as_ref(), s.block) {
                    ApproxClass::AlwaysHit => "always-hit",
                    ApproxClass::AlwaysMiss => "always-miss",
                    ApproxClass::Unknown => "unknown",
                },
                verdict: c.name(),
                method: m.name(),
                oracle: oracle.as_ref().map(|o| o[&s.site].name()),
            }
        })
        .collect();
    let exact_blocks = pipe.exact_blocks.iter().map(|b| g.block_name(*b).to_string()).collect();
    Ok(to_json(&CacheReport { sites, exact_blocks, oracle_note }))
}

/// `var=lo:hi` or `var=c`, separated by commas or whitespace.
fn parse_entries(text: &str) -> Result<Vec<(String, Interval)>, String> {
    let bound = |s: &str| s.parse::<Bound>().map_err(|_| format!("`{}` is not an integer or infinity", s.trim()));
    text.split([',', ' ', '\n'])
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let (var, range) = item.split_once('=').ok_or_else(|| format!("expected `var=lo:hi`, got `{item}`"))?;
            let (lo, hi) = match range.split_once(':') {
                Some((lo, hi)) => (bound(lo)?, bound(hi)?),
                None => (bound(range)?, bound(range)?),
            };
            match Interval::new(lo, hi) {
                Interval::Bottom => Err(format!("empty range for `{var}`")),
                i => Ok((var.trim().to_string(), i)),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct LocationRow {
    location: String,
    line: Option<u32>,
    reachable: bool,
    values: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct AssertRow {
    line: Option<u32>,
    cond: String,
    proved: bool,
}

#[derive(Serialize)]
struct IntervalReport {
    method: String,
    locations: Vec<LocationRow>,
    asserts: Vec<AssertRow>,
}

/// Interval invariants by `widen`, `widen-narrow`, `policy` or `exhaustive`.
/// `rewrites` is `off`, `full` or `truncated:<d>` and applies to the widening
/// methods.
pub fn interval_report(source: &str, entries: &str, method: &str, rewrites: &str) -> Result<String, String> {
    let g = load(source, false)?;
    let entries = parse_entries(entries)?;
    for (v, _) in &entries {
        if !g.vars().contains(v) {
            return Err(format!("`{v}` is not declared"));
        }
    }
    let env = entries.iter().fold(AbstractEnv::Env(BTreeMap::new()), |env, (v, i)| env.with(v, *i));
    let mode = match rewrites {
        "off" | "" => None,
        "full" => Some(RewriteMode::Full),
        r => match r.strip_prefix("truncated:").and_then(|d| d.parse().ok()) {
            Some(d) => Some(RewriteMode::Truncated(d)),
            None => return Err(format!("unknown rewrite mode `{r}`")),
        },
    };
    let res: IntervalResult = match method {
        "widen" | "widen-narrow" => {
            let opts = IterationOptions { widen_delay: 0, narrow_passes: usize::from(method == "widen-narrow") };
            match mode {
                None => analyze(&g, &env, opts),
                Some(m) => analyze_combined(&g, &env, m, opts).intervals,
            }
        }
        "policy" | "exhaustive" => {
            if mode.is_some() {
                return Err("rewrites apply to the widening methods only".into());
            }
            let [var] = g.vars() else {
                return Err("the exact solvers need a program with exactly one variable".into());
            };
            let entry = entries.iter().find(|(v, _)| v == var).map(|(_, i)| *i).unwrap_or(Interval::TOP);
            let ex = extract_upper_bounds(&g, var, entry).map_err(|e| e.to_string())?;
            let x = if method == "exhaustive" {
                solve_exhaustive(&ex.system, DEFAULT_SPLIT_CAP).map_err(|e| e.to_string())?
            } else {
                solve_policy_iteration(&ex.system).solution
            };
            let envs: Vec<AbstractEnv> = ex
                .intervals(&x)
                .into_iter()
                .map(|i| if i.is_bottom() { AbstractEnv::Unreachable } else { AbstractEnv::top(g.vars()).with(var, i) })
                .collect();
            let asserts = check_asserts(g.asserts(), &envs);
            IntervalResult { envs, asserts }
        }
        other => return Err(format!("unknown method `{other}`")),
    };
    let locations = g
        .locations()
        .map(|l| {
            let env = res.at(l);
            LocationRow {
                location: g.info(l).name.clone(),
                line: g.info(l).line,
                reachable: !env.is_unreachable(),
                values: g.vars().iter().map(|v| (v.clone(), env.get(v).to_string())).collect(),
            }
        })
        .collect();
    let asserts = res
        .asserts
        .iter()
        .zip(g.asserts())
        .map(|(v, a)| AssertRow { line: v.line, cond: a.cond.to_string(), proved: v.proved })
        .collect();
    let method = match mode {
        Some(m) => format!("{method}+rewrites:{m}"),
        None => method.to_string(),
    };
    Ok(to_json(&IntervalReport { method, locations, asserts }))
}

#[derive(Serialize)]
struct SolveReport {
    policy: Vec<(String, String)>,
    exhaustive: Result<Vec<(String, String)>, String>,
    policies_tried: usize,
    agree: Option<bool>,
    fixpoint: bool,
}

/// Both solvers on a system in dump format (`name = expr` per line).
pub fn solve_report(text: &str) -> Result<String, String> {
    let sys = BoundSystem::parse(text).map_err(|e| e.to_string())?;
    let show = |x: &[Bound]| named(&sys, x).into_iter().map(|(n, b)| (n, b.to_string())).collect::<Vec<_>>();
    let run = solve_policy_iteration(&sys);
    let ex = solve_exhaustive(&sys, DEFAULT_SPLIT_CAP);
    let report = SolveReport {
        policy: show(&run.solution),
        agree: ex.as_ref().ok().map(|x| *x == run.solution),
        exhaustive: ex.as_ref().map(|x| show(x)).map_err(|e| e.to_string()),
        policies_tried: run.policies.len(),
        fixpoint: sys.is_fixpoint(&run.solution),
    };
    Ok(to_json(&report))
}

#[wasm_bindgen]
pub fn classify_cache(source: &str, graph: bool, assoc: usize, init: &str) -> Result<String, JsValue> {
    cache_report(source, graph, assoc, init).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn analyze_intervals(source: &str, entries: &str, method: &str, rewrites: &str) -> Result<String, JsValue> {
    interval_report(source, entries, method, rewrites).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn solve_bounds(system: &str) -> Result<String, JsValue> {
    solve_report(system).map_err(|e| JsValue::from_str(&e))
}
