//! Interval abstract interpretation with widening and decreasing iterations.

mod domain;
mod engine;
mod transfer;

use serde::Serialize;

pub use domain::{AbstractEnv, Bound, Interval};
pub use engine::{fixpoint, IterationOptions, Lattice};
pub use transfer::{assign, eval, filter};

use crate::ir::{AssertSite, Cfg, Label, LocId};

impl Lattice for AbstractEnv {
    fn bottom() -> Self {
        AbstractEnv::Unreachable
    }
    fn join(&self, other: &Self) -> Self {
        AbstractEnv::join(self, other)
    }
    fn widen(&self, new: &Self) -> Self {
        AbstractEnv::widen(self, new)
    }
    fn meet(&self, other: &Self) -> Self {
        AbstractEnv::meet(self, other)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssertVerdict {
    pub id: usize,
    pub loc: LocId,
    pub line: Option<u32>,
    pub proved: bool,
}

#[derive(Clone, Debug)]
pub struct IntervalResult {
    pub envs: Vec<AbstractEnv>,
    pub asserts: Vec<AssertVerdict>,
}

impl IntervalResult {
    pub fn at(&self, l: LocId) -> &AbstractEnv {
        &self.envs[l.0]
    }

    pub fn all_proved(&self) -> bool {
        self.asserts.iter().all(|a| a.proved)
    }
}

/// An assertion holds when its negation is infeasible at the check location.
pub fn check_asserts(sites: &[AssertSite], envs: &[AbstractEnv]) -> Vec<AssertVerdict> {
    sites
        .iter()
        .map(|a| AssertVerdict {
            id: a.id,
            loc: a.loc,
            line: a.line,
            proved: filter(&a.cond.negate(), &envs[a.loc.0]).is_unreachable(),
        })
        .collect()
}

pub(crate) fn interval_transfer(label: &Label, env: &AbstractEnv) -> AbstractEnv {
    match label {
        Label::Assign(v, e) => assign(v, e, env),
        Label::Assume(c) => filter(c, env),
        Label::Access { .. } | Label::Nop => env.clone(),
    }
}

/// Fills in unconstrained intervals for program variables missing from `entry`.
pub(crate) fn complete_entry(g: &Cfg, entry: &AbstractEnv) -> AbstractEnv {
    match entry {
        AbstractEnv::Unreachable => AbstractEnv::Unreachable,
        AbstractEnv::Env(_) => {
            let mut env = AbstractEnv::top(g.vars());
            for (k, v) in entry.vars() {
                env.set(k, *v);
            }
            env
        }
    }
}

/// Forward interval analysis of a cache-free CFG.
pub fn analyze(g: &Cfg, entry_env: &AbstractEnv, opts: IterationOptions) -> IntervalResult {
    let init = complete_entry(g, entry_env);
    let envs = fixpoint(g, init, opts, |e, s| interval_transfer(&e.label, s));
    let asserts = check_asserts(g.asserts(), &envs);
    IntervalResult { envs, asserts }
}
