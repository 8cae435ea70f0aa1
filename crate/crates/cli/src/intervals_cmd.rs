use std::collections::BTreeMap;

use serde_json::Value;
use workbench_core::bounds::{concrete_hulls, extract_upper_bounds, solve_exhaustive, solve_policy_iteration, OracleError, OracleOptions};
use workbench_core::intervals::{analyze, check_asserts, AbstractEnv, Interval, IntervalResult, IterationOptions};
use workbench_core::ir::{Cfg, LocId, LocKind};
use workbench_core::symrewrite::{analyze_combined, RewriteMode};

use crate::report::{Report, Row};
use crate::{load, CliError, IntervalArgs, IntervalMethod, Timer, EXIT_BUDGET, EXIT_OK, EXIT_UNPROVED};

fn method_name(m: IntervalMethod) -> &'static str {
    match m {
        IntervalMethod::Widen => "widen",
        IntervalMethod::WidenNarrow => "widen-narrow",
        IntervalMethod::Policy => "policy",
        IntervalMethod::Exhaustive => "exhaustive",
        IntervalMethod::Oracle => "oracle",
    }
}

fn kind_name(k: LocKind) -> &'static str {
    match k {
        LocKind::Entry => "entry",
        LocKind::Point => "point",
        LocKind::LoopHead => "loop-head",
        LocKind::Join => "join",
    }
}

fn setup(a: &IntervalArgs, command: &'static str, method: String, t: &mut Timer) -> Result<(Cfg, Report), CliError> {
    if a.common.input.ends_with(".ag") {
        return Err(CliError::Input("interval analysis needs a toy program, not an access graph".into()));
    }
    let g = t.time("parse", || load(&a.common.input))?;
    for (v, _) in &a.entries {
        if !g.vars().contains(v) {
            return Err(CliError::Input(format!("--entry names `{v}`, which the program does not declare")));
        }
    }
    let mut r = Report::new(command, method, &a.common.input);
    if !a.entries.is_empty() {
        let parts: Vec<String> = a.entries.iter().map(|(v, i)| format!("{v}={i}")).collect();
        r.params.push("entry", parts.join(","));
    }
    Ok((g, r))
}

fn entry_env(a: &IntervalArgs) -> AbstractEnv {
    a.entries.iter().fold(AbstractEnv::Env(BTreeMap::new()), |env, (v, i)| env.with(v, *i))
}

fn widening(g: &Cfg, a: &IntervalArgs, narrow: bool, rewrites: Option<RewriteMode>) -> IntervalResult {
    let opts = IterationOptions { widen_delay: a.widen_delay, narrow_passes: if narrow { a.narrow_passes } else { 0 } };
    match rewrites {
        None => analyze(g, &entry_env(a), opts),
        Some(mode) => analyze_combined(g, &entry_env(a), mode, opts).intervals,
    }
}

fn chosen_var(g: &Cfg, a: &IntervalArgs) -> Result<String, CliError> {
    match (&a.var, g.vars()) {
        (Some(v), vars) if vars.contains(v) => Ok(v.clone()),
        (Some(v), _) => Err(CliError::Input(format!("`{v}` is not a program variable"))),
        (None, [only]) => Ok(only.clone()),
        (None, _) => Err(CliError::Input("the exact solvers handle one variable; choose it with --var".into())),
    }
}

/// Solves the bound system of one variable. Other variables stay unconstrained.
fn exact(g: &Cfg, a: &IntervalArgs, var: &str, exhaustive: bool) -> Result<IntervalResult, CliError> {
    let entry = a.entries.iter().find(|(v, _)| v == var).map(|(_, i)| *i).unwrap_or(Interval::TOP);
    let ex = extract_upper_bounds(g, var, entry).map_err(|e| CliError::Input(e.to_string()))?;
    let x = if exhaustive {
        solve_exhaustive(&ex.system, a.split_cap).map_err(|e| CliError::Budget(e.to_string()))?
    } else {
        solve_policy_iteration(&ex.system).solution
    };
    let envs: Vec<AbstractEnv> = ex
        .intervals(&x)
        .into_iter()
        .map(|i| match i {
            Interval::Bottom => AbstractEnv::Unreachable,
            i => AbstractEnv::top(g.vars()).with(var, i),
        })
        .collect();
    let asserts = check_asserts(g.asserts(), &envs);
    Ok(IntervalResult { envs, asserts })
}

fn oracle(g: &Cfg, a: &IntervalArgs) -> Result<IntervalResult, CliError> {
    let mut entry = BTreeMap::new();
    for (v, i) in &a.entries {
        match (i.lo().and_then(|b| b.finite()), i.hi().and_then(|b| b.finite())) {
            (Some(lo), Some(hi)) => entry.insert(v.clone(), (lo, hi)),
            _ => return Err(CliError::Input(format!("the oracle needs a finite entry range for `{v}`"))),
        };
    }
    concrete_hulls(g, &entry, OracleOptions { range: a.range, budget: a.budget }).map_err(|e| match e {
        OracleError::RangeExceeded { .. } | OracleError::Overflow { .. } | OracleError::BudgetExceeded(_) => {
            CliError::Budget(e.to_string())
        }
        OracleError::Uninitialized { .. } | OracleError::Unbounded { .. } | OracleError::UnknownVar(_) => {
            CliError::Input(e.to_string())
        }
    })
}

fn location_row(g: &Cfg, l: LocId) -> Row {
    let info = g.info(l);
    Row::new().with("location", info.name.clone()).with("line", info.line).with("kind", kind_name(info.kind))
}

fn value(env: &AbstractEnv, var: &str) -> String {
    if env.is_unreachable() {
        "unreachable".into()
    } else {
        env.get(var).to_string()
    }
}

fn verdict(proved: bool) -> &'static str {
    if proved {
        "proved"
    } else {
        "unproved"
    }
}

pub(crate) fn run(a: &IntervalArgs) -> Result<(Report, i32), CliError> {
    let mut t = Timer::new(a.common.timings);
    let rewrites = a.rewrites.0;
    let widens = matches!(a.method, IntervalMethod::Widen | IntervalMethod::WidenNarrow);
    if rewrites.is_some() && !widens {
        return Err(CliError::Input("--rewrites applies to `widen` and `widen-narrow` only".into()));
    }
    let method = match rewrites {
        Some(m) => format!("{}+rewrites:{m}", method_name(a.method)),
        None => method_name(a.method).to_string(),
    };
    let (g, mut r) = setup(a, "intervals", method.clone(), &mut t)?;
    let phase = method_name(a.method);
    let res = match a.method {
        IntervalMethod::Widen | IntervalMethod::WidenNarrow => {
            r.params.push("widen_delay", a.widen_delay);
            if a.method == IntervalMethod::WidenNarrow {
                r.params.push("narrow_passes", a.narrow_passes);
            }
            t.time(phase, || widening(&g, a, a.method == IntervalMethod::WidenNarrow, rewrites))
        }
        IntervalMethod::Policy | IntervalMethod::Exhaustive => {
            let var = chosen_var(&g, a)?;
            r.params.push("var", var.clone());
            let exhaustive = a.method == IntervalMethod::Exhaustive;
            if exhaustive {
                r.params.push("split_cap", a.split_cap);
            }
            t.time(phase, || exact(&g, a, &var, exhaustive))?
        }
        IntervalMethod::Oracle => {
            r.params.push("range", format!("{}:{}", a.range.0, a.range.1));
            r.params.push("budget", a.budget);
            t.time(phase, || oracle(&g, a))?
        }
    };
    for l in g.locations() {
        let mut row = location_row(&g, l);
        for v in g.vars() {
            row.push(v.clone(), value(res.at(l), v));
        }
        r.results.push(row.with("method", method.clone()));
    }
    for (v, site) in res.asserts.iter().zip(g.asserts()) {
        r.asserts.push(
            Row::new()
                .with("assert", v.id)
                .with("location", g.info(v.loc).name.clone())
                .with("line", v.line)
                .with("cond", site.cond.to_string())
                .with("verdict", verdict(v.proved))
                .with("method", method.clone()),
        );
    }
    t.finish(&mut r);
    let code = if res.all_proved() { EXIT_OK } else { EXIT_UNPROVED };
    Ok((r, code))
}

const COMPARED: [&str; 6] = ["widen", "widen-narrow", "rewrites", "policy", "exhaustive", "oracle"];

/// Every method per (location, variable). Methods that cannot run on the
/// input get `null` columns and a note in the parameters.
pub(crate) fn compare(a: &IntervalArgs) -> Result<(Report, i32), CliError> {
    let mut t = Timer::new(a.common.timings);
    let (g, mut r) = setup(a, "compare-intervals", COMPARED.join(","), &mut t)?;
    let mode = a.rewrites.0.unwrap_or(RewriteMode::Full);
    r.params.push("rewrites", mode.to_string());
    let mut code = EXIT_OK;
    let mut runs: Vec<(&str, Option<IntervalResult>)> = vec![
        ("widen", Some(t.time("widen", || widening(&g, a, false, None)))),
        ("widen-narrow", Some(t.time("widen-narrow", || widening(&g, a, true, None)))),
        ("rewrites", Some(t.time("rewrites", || widening(&g, a, true, Some(mode))))),
    ];
    let var = chosen_var(&g, a);
    for (name, exhaustive) in [("policy", false), ("exhaustive", true)] {
        let res = match &var {
            Ok(v) => t.time(name, || exact(&g, a, v, exhaustive)),
            Err(e) => Err(CliError::Input(e.to_string())),
        };
        runs.push((name, note(&mut r, name, res, &mut code)));
    }
    let res = t.time("oracle", || oracle(&g, a));
    runs.push(("oracle", note(&mut r, "oracle", res, &mut code)));
    let exact_var = var.ok();

    let mut disagreements = Vec::new();
    for l in g.locations() {
        for v in g.vars() {
            let applies = |name: &str| !matches!(name, "policy" | "exhaustive") || exact_var.as_deref() == Some(v.as_str());
            let cell = |name: &str| -> Option<&AbstractEnv> {
                runs.iter().find(|(n, _)| *n == name).and_then(|(_, res)| res.as_ref()).filter(|_| applies(name)).map(|res| res.at(l))
            };
            let mut row = location_row(&g, l).with("var", v.clone());
            for name in COMPARED {
                row.push(name, cell(name).map(|e| Value::from(value(e, v))).unwrap_or(Value::Null));
            }
            r.results.push(row);
            let iv = |e: &AbstractEnv| if e.is_unreachable() { Interval::Bottom } else { e.get(v) };
            let mut flag = |left: &str, right: &str, kind: &str, lv: &AbstractEnv, rv: &AbstractEnv| {
                disagreements.push(
                    location_row(&g, l)
                        .with("var", v.clone())
                        .with("between", format!("{left}/{right}"))
                        .with("left", value(lv, v))
                        .with("right", value(rv, v))
                        .with("issue", kind.to_string()),
                );
            };
            if let Some(o) = cell("oracle") {
                for name in COMPARED.iter().filter(|n| **n != "oracle") {
                    if let Some(m) = cell(name) {
                        if !iv(o).leq(&iv(m)) {
                            flag("oracle", name, "unsound", o, m);
                        } else if matches!(*name, "policy" | "exhaustive") && iv(o) != iv(m) {
                            flag("oracle", name, "hull-gap", o, m);
                        }
                    }
                }
            }
            if let (Some(p), Some(x)) = (cell("policy"), cell("exhaustive")) {
                if iv(p) != iv(x) {
                    flag("policy", "exhaustive", "solver-mismatch", p, x);
                }
            }
            if let (Some(w), Some(p)) = (cell("widen-narrow"), cell("policy")) {
                if iv(w) != iv(p) {
                    let kind = if iv(p).leq(&iv(w)) { "imprecise" } else { "contradiction" };
                    flag("widen-narrow", "policy", kind, w, p);
                }
            }
        }
    }
    r.disagreements = Some(disagreements);

    for (i, site) in g.asserts().iter().enumerate() {
        let mut row = Row::new()
            .with("assert", site.id)
            .with("location", g.info(site.loc).name.clone())
            .with("line", site.line)
            .with("cond", site.cond.to_string());
        for (name, res) in &runs {
            row.push(*name, res.as_ref().map(|res| Value::from(verdict(res.asserts[i].proved))).unwrap_or(Value::Null));
        }
        r.asserts.push(row);
    }
    t.finish(&mut r);
    Ok((r, code))
}

/// Keeps a successful run; records why a method could not run. An exceeded
/// budget still sets the exit code.
fn note(r: &mut Report, name: &str, res: Result<IntervalResult, CliError>, code: &mut i32) -> Option<IntervalResult> {
    match res {
        Ok(res) => Some(res),
        Err(e) => {
            if matches!(e, CliError::Budget(_)) {
                *code = EXIT_BUDGET;
            }
            r.params.push(name.to_string(), format!("n/a: {e}"));
            None
        }
    }
}
