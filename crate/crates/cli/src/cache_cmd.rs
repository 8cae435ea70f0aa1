use std::collections::BTreeMap;

use serde_json::Value;
use workbench_core::cache::{
    analyze_approx, classify_approx, classify_exact, classify_oracle, prefilter, resolve_open_sites, ApproxClass,
    CacheError, Classification, InitialCachePolicy,
};
use workbench_core::ir::{Cfg, SiteId};

use crate::report::{Report, Row};
use crate::{load, CacheArgs, CacheMethod, CliError, InitArg, Timer, EXIT_BUDGET, EXIT_OK};

fn policy(a: &CacheArgs) -> InitialCachePolicy {
    match a.init {
        InitArg::Empty => InitialCachePolicy::Empty,
        InitArg::Unknown => InitialCachePolicy::Unknown,
    }
}

fn method_name(m: CacheMethod) -> &'static str {
    match m {
        CacheMethod::Approx => "approx",
        CacheMethod::Exact => "exact",
        CacheMethod::Oracle => "oracle",
        CacheMethod::Pipeline => "pipeline",
    }
}

fn setup(a: &CacheArgs, command: &'static str, method: &str, t: &mut Timer) -> Result<(Cfg, Report), CliError> {
    if a.assoc == 0 {
        return Err(CliError::Input("associativity must be at least 1".into()));
    }
    let g = t.time("parse", || load(&a.common.input))?;
    let mut r = Report::new(command, method, &a.common.input);
    r.params.push("assoc", a.assoc);
    r.params.push("init", if a.init == InitArg::Empty { "empty" } else { "unknown" });
    Ok((g, r))
}

fn site_row(g: &Cfg, site: SiteId) -> Row {
    let s = g.access_sites()[site.0];
    Row::new().with("site", site.0).with("location", g.info(s.src).name.clone()).with("block", g.block_name(s.block))
}

fn approx_verdicts(g: &Cfg, assoc: usize, p: InitialCachePolicy) -> BTreeMap<SiteId, &'static str> {
    let bounds = analyze_approx(g, assoc, p);
    g.access_sites()
        .iter()
        .map(|s| {
            let v = match classify_approx(bounds[s.src.0].as_ref(), s.block) {
                ApproxClass::AlwaysHit => "always-hit",
                ApproxClass::AlwaysMiss => "always-miss",
                ApproxClass::Unknown => "unknown",
            };
            (s.site, v)
        })
        .collect()
}

fn oracle(g: &Cfg, a: &CacheArgs) -> Result<BTreeMap<SiteId, Classification>, CliError> {
    classify_oracle(g, a.assoc, policy(a), a.budget).map_err(|e| match e {
        CacheError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
        CacheError::ZeroAssociativity => CliError::Input(e.to_string()),
    })
}

pub(crate) fn run(a: &CacheArgs) -> Result<(Report, i32), CliError> {
    let mut t = Timer::new(a.common.timings);
    let (g, mut r) = setup(a, "cache", method_name(a.method), &mut t)?;
    let p = policy(a);
    let tagged: BTreeMap<SiteId, (String, &'static str)> = match a.method {
        CacheMethod::Approx => {
            let v = t.time("approx", || approx_verdicts(&g, a.assoc, p));
            v.into_iter().map(|(s, c)| (s, (c.to_string(), "approx"))).collect()
        }
        CacheMethod::Exact => {
            let v = t.time("exact", || classify_exact(&g, a.assoc, p));
            v.into_iter().map(|(s, c)| (s, (c.to_string(), "exact"))).collect()
        }
        CacheMethod::Oracle => {
            let v = t.time("oracle", || oracle(&g, a))?;
            v.into_iter().map(|(s, c)| (s, (c.to_string(), "oracle"))).collect()
        }
        CacheMethod::Pipeline => {
            let mut rep = t.time("approx", || prefilter(&g, a.assoc, p));
            t.time("exact", || resolve_open_sites(&g, a.assoc, p, &mut rep));
            r.params.push("exact_blocks", rep.exact_blocks.iter().map(|b| g.block_name(*b)).collect::<Vec<_>>().join(","));
            rep.sites.into_iter().map(|(s, (c, m))| (s, (c.to_string(), m.name()))).collect()
        }
    };
    for (site, (verdict, method)) in tagged {
        r.results.push(site_row(&g, site).with("verdict", verdict).with("method", method));
    }
    t.finish(&mut r);
    Ok((r, EXIT_OK))
}

/// All four methods per site. The oracle column is `null` when its budget
/// runs out, and the exit code then reports the exceeded budget.
pub(crate) fn compare(a: &CacheArgs) -> Result<(Report, i32), CliError> {
    let mut t = Timer::new(a.common.timings);
    let (g, mut r) = setup(a, "compare-cache", "approx,exact,pipeline,oracle", &mut t)?;
    let p = policy(a);
    let approx = t.time("approx", || approx_verdicts(&g, a.assoc, p));
    let exact = t.time("exact", || classify_exact(&g, a.assoc, p));
    let mut pipe = t.time("pipeline", || prefilter(&g, a.assoc, p));
    t.time("pipeline", || resolve_open_sites(&g, a.assoc, p, &mut pipe));
    let (truth, code) = match t.time("oracle", || oracle(&g, a)) {
        Ok(o) => (Some(o), EXIT_OK),
        Err(CliError::Budget(msg)) => {
            r.params.push("oracle", msg);
            (None, EXIT_BUDGET)
        }
        Err(e) => return Err(e),
    };
    let mut disagreements = Vec::new();
    for s in g.access_sites() {
        let ex = exact[&s.site];
        let (pc, pm) = pipe.sites[&s.site];
        let or = truth.as_ref().map(|o| o[&s.site]);
        r.results.push(
            site_row(&g, s.site)
                .with("approx", approx[&s.site])
                .with("exact", ex.name())
                .with("pipeline", pc.name())
                .with("pipeline_method", pm.name())
                .with("oracle", or.map(|c| Value::from(c.name())).unwrap_or(Value::Null)),
        );
        let mut note = |between: &'static str, left: &str, right: &str, kind: &'static str| {
            disagreements.push(
                site_row(&g, s.site).with("between", between).with("left", left).with("right", right).with("issue", kind),
            );
        };
        let ap = approx[&s.site];
        if ap != ex.name() {
            let kind = if ap == "unknown" { "approx-undecided" } else { "contradiction" };
            note("approx/exact", ap, ex.name(), kind);
        }
        if pc != ex {
            note("pipeline/exact", pc.name(), ex.name(), "contradiction");
        }
        if let Some(o) = or.filter(|o| *o != ex) {
            note("exact/oracle", ex.name(), o.name(), "contradiction");
        }
    }
    r.disagreements = Some(disagreements);
    t.finish(&mut r);
    Ok((r, code))
}
