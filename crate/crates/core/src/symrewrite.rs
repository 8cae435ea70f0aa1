//! Interval analysis carrying a chronological rewriting system. Assignments are
//! evaluated on the original and on the rewritten, linearly simplified right-hand
//! side, and the two intervals are intersected.

use std::collections::BTreeMap;
use std::fmt;

use crate::intervals::{check_asserts, complete_entry, eval, filter, fixpoint, AbstractEnv, Bound, Interval, IntervalResult, IterationOptions, Lattice};
use crate::ir::{Cfg, Cond, Expr, Label, RelOp};

/// `constant + sum(coeff * var)`, with no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Linear {
    terms: BTreeMap<String, i64>,
    constant: i64,
}

impl Linear {
    /// `None` for nondeterministic expressions or on coefficient overflow.
    pub fn from_expr(e: &Expr) -> Option<Linear> {
        match e {
            Expr::Const(c) => Some(Linear { terms: BTreeMap::new(), constant: *c }),
            Expr::Var(v) => Some(Linear { terms: BTreeMap::from([(v.clone(), 1)]), constant: 0 }),
            Expr::Add(l, r) => Linear::from_expr(l)?.plus(&Linear::from_expr(r)?, 1),
            Expr::Sub(l, r) => Linear::from_expr(l)?.plus(&Linear::from_expr(r)?, -1),
            Expr::Nondet => None,
        }
    }

    /// `self + k * other`.
    fn plus(mut self, other: &Linear, k: i64) -> Option<Linear> {
        self.constant = self.constant.checked_add(other.constant.checked_mul(k)?)?;
        for (v, c) in &other.terms {
            let slot = self.terms.entry(v.clone()).or_insert(0);
            *slot = slot.checked_add(c.checked_mul(k)?)?;
            if *slot == 0 {
                self.terms.remove(v);
            }
        }
        Some(self)
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.terms.contains_key(v)
    }

    /// Canonical expression: variables in name order, each repeated by its
    /// coefficient, then the constant.
    pub fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = None;
        for (v, &c) in &self.terms {
            for _ in 0..c.unsigned_abs() {
                acc = Some(match (acc, c > 0) {
                    (None, true) => Expr::var(v),
                    (None, false) => Expr::sub(Expr::Const(0), Expr::var(v)),
                    (Some(a), true) => Expr::add(a, Expr::var(v)),
                    (Some(a), false) => Expr::sub(a, Expr::var(v)),
                });
            }
        }
        match acc {
            None => Expr::Const(self.constant),
            Some(a) if self.constant > 0 => Expr::add(a, Expr::Const(self.constant)),
            Some(a) if self.constant < 0 => match self.constant.checked_neg() {
                Some(n) => Expr::sub(a, Expr::Const(n)),
                None => Expr::add(a, Expr::Const(self.constant)),
            },
            Some(a) => a,
        }
    }

    pub fn eval(&self, env: &AbstractEnv) -> Interval {
        if env.is_unreachable() {
            return Interval::Bottom;
        }
        self.terms
            .iter()
            .fold(Interval::constant(self.constant), |acc, (v, &c)| acc.add(&scale(env.get(v), c)))
    }
}

impl fmt::Display for Linear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// `k * x` over intervals; overflowing ends go to the matching infinity.
fn scale(x: Interval, k: i64) -> Interval {
    let (Some(lo), Some(hi)) = (x.lo(), x.hi()) else {
        return Interval::Bottom;
    };
    let mul = |b: Bound, toward: Bound| match b {
        Bound::Fin(n) => i64::try_from(n as i128 * k as i128).map(Bound::Fin).unwrap_or(toward),
        inf if k > 0 => inf,
        inf => inf.neg(),
    };
    match k.cmp(&0) {
        std::cmp::Ordering::Equal => Interval::constant(0),
        std::cmp::Ordering::Greater => Interval::new(mul(lo, Bound::NegInf), mul(hi, Bound::PosInf)),
        std::cmp::Ordering::Less => Interval::new(mul(hi, Bound::NegInf), mul(lo, Bound::PosInf)),
    }
}

/// How far rewriting follows chains of rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteMode {
    /// Exhaustive rewriting; recorded rules are stored fully rewritten.
    Full,
    /// At most `d` substitution rounds from any expression; recorded rules
    /// are stored after `d - 1` rounds.
    Truncated(usize),
}

impl RewriteMode {
    fn use_rounds(self) -> Option<usize> {
        match self {
            RewriteMode::Full => None,
            RewriteMode::Truncated(d) => Some(d),
        }
    }

    fn store_rounds(self) -> Option<usize> {
        match self {
            RewriteMode::Full => None,
            RewriteMode::Truncated(d) => Some(d.saturating_sub(1)),
        }
    }
}

impl fmt::Display for RewriteMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteMode::Full => write!(f, "full"),
            RewriteMode::Truncated(d) => write!(f, "truncated:{d}"),
        }
    }
}

/// Rules `var -> linear expression` in recording order. No rule's right-hand
/// side depends, even transitively, on its own left-hand side.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewriteMap {
    rules: Vec<(String, Linear)>,
}

impl RewriteMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rules(&self) -> &[(String, Linear)] {
        &self.rules
    }

    pub fn get(&self, v: &str) -> Option<&Linear> {
        self.rules.iter().find(|(w, _)| w == v).map(|(_, r)| r)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// One simultaneous substitution of every variable that has a rule.
    fn substitute(&self, l: &Linear) -> Option<Linear> {
        let mut out = Linear { terms: BTreeMap::new(), constant: l.constant };
        for (v, &c) in &l.terms {
            match self.get(v) {
                Some(r) => out = out.plus(r, c)?,
                None => out = out.plus(&Linear { terms: BTreeMap::from([(v.clone(), 1)]), constant: 0 }, c)?,
            }
        }
        Some(out)
    }

    /// Up to `rounds` substitution rounds, or until nothing changes. Overflow
    /// stops at the last representable form.
    fn rewrite(&self, l: &Linear, rounds: Option<usize>) -> Linear {
        let mut cur = l.clone();
        // Acyclicity bounds the chain length by the number of rules.
        let limit = rounds.unwrap_or(self.rules.len() + 1);
        for _ in 0..limit {
            match self.substitute(&cur) {
                Some(next) if next != cur => cur = next,
                _ => break,
            }
        }
        cur
    }

    /// Records `v = e` in full mode.
    pub fn record(&self, v: &str, e: &Expr) -> RewriteMap {
        self.record_with(v, e, RewriteMode::Full)
    }

    /// Drops every rule mentioning `v`, then appends `v -> e` rewritten through
    /// the old rules, unless `e` is nondeterministic or still mentions `v`.
    pub fn record_with(&self, v: &str, e: &Expr, mode: RewriteMode) -> RewriteMap {
        let rhs = Linear::from_expr(e).map(|l| self.rewrite(&l, mode.store_rounds()));
        let mut rules: Vec<_> = self.rules.iter().filter(|(w, r)| w != v && !r.mentions(v)).cloned().collect();
        if let Some(r) = rhs.filter(|r| !r.mentions(v)) {
            rules.push((v.to_string(), r));
        }
        RewriteMap { rules }
    }

    /// Rules present, identically, on both sides.
    pub fn join(&self, other: &RewriteMap) -> RewriteMap {
        let rules = self.rules.iter().filter(|(v, r)| other.get(v) == Some(r)).cloned().collect();
        RewriteMap { rules }
    }

    fn rewrite_expr(&self, e: &Expr, mode: RewriteMode) -> Option<Linear> {
        Linear::from_expr(e).map(|l| self.rewrite(&l, mode.use_rounds()))
    }
}

impl fmt::Display for RewriteMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, r)) in self.rules.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} -> {r}")?;
        }
        write!(f, "}}")
    }
}

/// Exhaustive rewriting followed by linear canonicalization. Nondeterministic
/// expressions are returned unchanged.
pub fn rewrite_and_simplify(m: &RewriteMap, e: &Expr) -> Expr {
    match m.rewrite_expr(e, RewriteMode::Full) {
        Some(l) => l.to_expr(),
        None => e.clone(),
    }
}

/// Intervals paired with the rules valid at a location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinedState {
    pub env: AbstractEnv,
    pub rules: RewriteMap,
}

impl Lattice for CombinedState {
    fn bottom() -> Self {
        CombinedState { env: AbstractEnv::Unreachable, rules: RewriteMap::new() }
    }

    fn join(&self, other: &Self) -> Self {
        if self.env.is_unreachable() {
            return other.clone();
        }
        if other.env.is_unreachable() {
            return self.clone();
        }
        CombinedState { env: self.env.join(&other.env), rules: self.rules.join(&other.rules) }
    }

    fn widen(&self, new: &Self) -> Self {
        if self.env.is_unreachable() {
            return new.clone();
        }
        CombinedState { env: self.env.widen(&new.env), rules: self.rules.join(&new.rules) }
    }

    fn meet(&self, other: &Self) -> Self {
        let env = self.env.meet(&other.env);
        if env.is_unreachable() {
            return Self::bottom();
        }
        CombinedState { env, rules: self.rules.join(&other.rules) }
    }
}

fn cmp_target(op: RelOp) -> Option<Interval> {
    let fin = Interval::new;
    Some(match op {
        RelOp::Lt => fin(Bound::NegInf, Bound::Fin(-1)),
        RelOp::Le => fin(Bound::NegInf, Bound::Fin(0)),
        RelOp::Gt => fin(Bound::Fin(1), Bound::PosInf),
        RelOp::Ge => fin(Bound::Fin(0), Bound::PosInf),
        RelOp::Eq => Interval::constant(0),
        RelOp::Ne => return None,
    })
}

/// Refines through the original condition only. The rewritten condition can
/// only rule the branch out.
fn guard(c: &Cond, s: &CombinedState, mode: RewriteMode) -> AbstractEnv {
    let env = filter(c, &s.env);
    let Cond::Cmp(l, op, r) = c else {
        return env;
    };
    let Some(diff) = s.rules.rewrite_expr(&Expr::sub(l.clone(), r.clone()), mode) else {
        return env;
    };
    let d = diff.eval(&env);
    let infeasible = match cmp_target(*op) {
        Some(t) => d.meet(&t).is_bottom(),
        None => d == Interval::constant(0),
    };
    if infeasible {
        AbstractEnv::Unreachable
    } else {
        env
    }
}

fn transfer(label: &Label, s: &CombinedState, mode: RewriteMode) -> CombinedState {
    if s.env.is_unreachable() {
        return CombinedState::bottom();
    }
    let env = match label {
        Label::Assign(v, e) => {
            let mut value = eval(e, &s.env);
            if let Some(rw) = s.rules.rewrite_expr(e, mode) {
                value = value.meet(&rw.eval(&s.env));
            }
            let rules = s.rules.record_with(v, e, mode);
            return match s.env.clone().with(v, value) {
                AbstractEnv::Unreachable => CombinedState::bottom(),
                env => CombinedState { env, rules },
            };
        }
        Label::Assume(c) => guard(c, s, mode),
        Label::Access { .. } | Label::Nop => return s.clone(),
    };
    if env.is_unreachable() {
        CombinedState::bottom()
    } else {
        CombinedState { env, rules: s.rules.clone() }
    }
}

#[derive(Clone, Debug)]
pub struct CombinedResult {
    pub intervals: IntervalResult,
    pub rules: Vec<RewriteMap>,
}

/// Interval analysis of a cache-free CFG with rewriting. Asserts count as
/// proved when either the original or the rewritten negation is infeasible.
pub fn analyze_combined(g: &Cfg, entry_env: &AbstractEnv, mode: RewriteMode, opts: IterationOptions) -> CombinedResult {
    let init = CombinedState { env: complete_entry(g, entry_env), rules: RewriteMap::new() };
    let states = fixpoint(g, init, opts, |e, s| transfer(&e.label, s, mode));
    let envs: Vec<AbstractEnv> = states.iter().map(|s| s.env.clone()).collect();
    let mut asserts = check_asserts(g.asserts(), &envs);
    for (v, site) in asserts.iter_mut().zip(g.asserts()) {
        v.proved = v.proved || guard(&site.cond.negate(), &states[site.loc.0], mode).is_unreachable();
    }
    CombinedResult { intervals: IntervalResult { envs, asserts }, rules: states.into_iter().map(|s| s.rules).collect() }
}
