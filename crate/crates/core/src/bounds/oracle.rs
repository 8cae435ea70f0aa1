//! Explicit-state ground truth for interval results.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use crate::intervals::{AbstractEnv, AssertVerdict, Interval, IntervalResult};
use crate::ir::{Cfg, Cond, Expr, Label, LocId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    /// Every value that occurs must lie in `[range.0, range.1]`.
    pub range: (i64, i64),
    /// Cap on the number of distinct (location, store) pairs.
    pub budget: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { range: (-1_000_000, 1_000_000), budget: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("value {value} of `{var}` at {loc} leaves the range [{lo}, {hi}]")]
    RangeExceeded { var: String, value: i64, loc: String, lo: i64, hi: i64 },
    #[error("`{expr}` overflows at {loc}")]
    Overflow { expr: String, loc: String },
    #[error("state budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("`{var}` is read at {loc} before any assignment and has no entry range")]
    Uninitialized { var: String, loc: String },
    #[error("nondeterministic assignment at {loc} has no finite range")]
    Unbounded { loc: String },
    #[error("`{0}` is not a program variable")]
    UnknownVar(String),
}

type Store = Vec<Option<i64>>;

struct Machine<'a> {
    g: &'a Cfg,
    opts: OracleOptions,
}

impl Machine<'_> {
    fn loc(&self, l: LocId) -> String {
        self.g.info(l).name.clone()
    }

    fn index(&self, var: &str) -> usize {
        self.g.vars().iter().position(|v| v == var).expect("parser checks declarations")
    }

    fn eval(&self, e: &Expr, s: &Store, l: LocId) -> Result<i64, OracleError> {
        let wrap = |v: Option<i64>| v.ok_or_else(|| OracleError::Overflow { expr: e.to_string(), loc: self.loc(l) });
        match e {
            Expr::Const(c) => Ok(*c),
            Expr::Var(v) => s[self.index(v)].ok_or_else(|| OracleError::Uninitialized { var: v.clone(), loc: self.loc(l) }),
            Expr::Add(a, b) => wrap(self.eval(a, s, l)?.checked_add(self.eval(b, s, l)?)),
            Expr::Sub(a, b) => wrap(self.eval(a, s, l)?.checked_sub(self.eval(b, s, l)?)),
            Expr::Nondet => Err(OracleError::Unbounded { loc: self.loc(l) }),
        }
    }

    fn holds(&self, c: &Cond, s: &Store, l: LocId) -> Result<Option<bool>, OracleError> {
        Ok(match c {
            Cond::Nondet => None,
            Cond::Bool(b) => Some(*b),
            Cond::Cmp(a, op, b) => Some(op.holds(self.eval(a, s, l)?, self.eval(b, s, l)?)),
        })
    }

    fn out_of_range(&self, l: LocId, var: &str, value: i64) -> OracleError {
        let (lo, hi) = self.opts.range;
        OracleError::RangeExceeded { var: var.to_string(), value, loc: self.loc(l), lo, hi }
    }
}

/// Reachable stores per location, plus the assertion verdicts.
fn explore(
    g: &Cfg,
    entry: &BTreeMap<String, (i64, i64)>,
    opts: OracleOptions,
) -> Result<(Vec<HashSet<Store>>, Vec<AssertVerdict>), OracleError> {
    let m = Machine { g, opts };
    let (lo, hi) = opts.range;
    let vars = g.vars();
    for (name, &(a, b)) in entry {
        if !vars.contains(name) {
            return Err(OracleError::UnknownVar(name.clone()));
        }
        for v in [a, b] {
            if v < lo || v > hi {
                return Err(m.out_of_range(g.entry(), name, v));
            }
        }
    }
    let mut seeds: Vec<Store> = vec![Vec::new()];
    for name in vars {
        let choices: Vec<Option<i64>> = match entry.get(name) {
            Some(&(a, b)) => (a..=b).map(Some).collect(),
            None => vec![None],
        };
        seeds = seeds
            .into_iter()
            .flat_map(|s| choices.iter().map(move |c| {
                let mut t = s.clone();
                t.push(*c);
                t
            }))
            .collect();
        if seeds.len() > opts.budget {
            return Err(OracleError::BudgetExceeded(opts.budget));
        }
    }

    let mut seen: Vec<HashSet<Store>> = vec![HashSet::new(); g.num_locations()];
    let mut total = 0usize;
    let mut work = VecDeque::new();
    for s in seeds {
        if seen[g.entry().0].insert(s.clone()) {
            total += 1;
            work.push_back((g.entry(), s));
        }
    }
    while let Some((l, s)) = work.pop_front() {
        for e in g.out_edges(l) {
            let next = match &e.label {
                Label::Nop | Label::Access { .. } => Some(s.clone()),
                Label::Assume(c) => match m.holds(c, &s, l)? {
                    Some(false) => None,
                    _ => Some(s.clone()),
                },
                Label::Assign(v, rhs) => {
                    let val = m.eval(rhs, &s, l)?;
                    if val < lo || val > hi {
                        return Err(m.out_of_range(e.dst, v, val));
                    }
                    let mut t = s.clone();
                    t[m.index(v)] = Some(val);
                    Some(t)
                }
            };
            if let Some(t) = next {
                if seen[e.dst.0].insert(t.clone()) {
                    total += 1;
                    if total > opts.budget {
                        return Err(OracleError::BudgetExceeded(opts.budget));
                    }
                    work.push_back((e.dst, t));
                }
            }
        }
    }

    let mut asserts = Vec::new();
    for a in g.asserts() {
        let mut proved = true;
        for s in &seen[a.loc.0] {
            if m.holds(&a.cond, s, a.loc)? == Some(false) {
                proved = false;
            }
        }
        asserts.push(AssertVerdict { id: a.id, loc: a.loc, line: a.line, proved });
    }
    Ok((seen, asserts))
}

/// Reachable stores of every location, summarized as per-variable hulls.
///
/// Variables without an entry range start undefined; reading one is an
/// error. A variable undefined in some reachable store has an unconstrained
/// hull there.
pub fn concrete_hulls(
    g: &Cfg,
    entry: &BTreeMap<String, (i64, i64)>,
    opts: OracleOptions,
) -> Result<IntervalResult, OracleError> {
    let (seen, asserts) = explore(g, entry, opts)?;
    let vars = g.vars();
    let envs: Vec<AbstractEnv> = seen
        .iter()
        .map(|stores| {
            if stores.is_empty() {
                return AbstractEnv::Unreachable;
            }
            let mut env = AbstractEnv::Env(BTreeMap::new());
            for (i, name) in vars.iter().enumerate() {
                let mut hull = Interval::Bottom;
                for s in stores {
                    hull = hull.join(&s[i].map(Interval::constant).unwrap_or(Interval::TOP));
                }
                env.set(name, hull);
            }
            env
        })
        .collect();
    Ok(IntervalResult { envs, asserts })
}

/// Per-location hull of `var`'s reachable values.
pub fn bounded_concrete_oracle(
    g: &Cfg,
    var: &str,
    entry: &BTreeMap<String, (i64, i64)>,
    opts: OracleOptions,
) -> Result<Vec<Interval>, OracleError> {
    if !g.vars().iter().any(|v| v == var) {
        return Err(OracleError::UnknownVar(var.to_string()));
    }
    Ok(concrete_hulls(g, entry, opts)?.envs.iter().map(|e| e.get(var)).collect())
}

/// Reachable values of `var` per location. A store where `var` is undefined
/// counts as an uninitialized read.
pub fn reachable_values(
    g: &Cfg,
    var: &str,
    entry: &BTreeMap<String, (i64, i64)>,
    opts: OracleOptions,
) -> Result<Vec<BTreeSet<i64>>, OracleError> {
    let i = g.vars().iter().position(|v| v == var).ok_or_else(|| OracleError::UnknownVar(var.to_string()))?;
    let (seen, _) = explore(g, entry, opts)?;
    seen.iter()
        .enumerate()
        .map(|(l, stores)| {
            stores
                .iter()
                .map(|s| s[i].ok_or_else(|| OracleError::Uninitialized { var: var.to_string(), loc: g.info(LocId(l)).name.clone() }))
                .collect()
        })
        .collect()
}
