//! Least solutions of bound systems over the integers extended with both
//! infinities.

use std::collections::HashMap;

use super::system::{guard_holds, BoundExpr, BoundSystem, VarId};
use crate::intervals::Bound;

pub const DEFAULT_SPLIT_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("system needs {needed} case splits, more than the cap of {cap}")]
pub struct CapExceeded {
    pub needed: usize,
    pub cap: usize,
}

/// Atomic constraint of a case.
#[derive(Clone, Debug)]
enum Atom {
    /// `x_v >= x_w + c`
    Edge { v: usize, w: usize, c: i64 },
    /// `x_v >= k`
    Floor { v: usize, k: Bound },
    /// `x_w <= k`
    Ceil { w: usize, k: Bound },
}

/// Right side of a goal `e <= target`. Offsets saturate, which only matters
/// for constants near the ends of `i64`.
#[derive(Clone, Copy)]
enum Target {
    /// `x_v + offset`
    Var(usize, i64),
    Const(Bound),
}

/// Number of binary case splits: one per `Min` node and one per distinct
/// guard condition.
pub fn split_count(sys: &BoundSystem) -> usize {
    fn walk<'a>(e: &'a BoundExpr, mins: &mut usize, guards: &mut Vec<(&'a BoundExpr, Bound)>) {
        match e {
            BoundExpr::Const(_) | BoundExpr::Var(_) => {}
            BoundExpr::Add(a, _) => walk(a, mins, guards),
            BoundExpr::Max(a, b) => {
                walk(a, mins, guards);
                walk(b, mins, guards);
            }
            BoundExpr::Min(a, b) => {
                *mins += 1;
                walk(a, mins, guards);
                walk(b, mins, guards);
            }
            BoundExpr::Guard { test, threshold, value } => {
                if !guards.contains(&(&**test, *threshold)) {
                    guards.push((test, *threshold));
                }
                walk(test, mins, guards);
                walk(value, mins, guards);
            }
        }
    }
    let (mut mins, mut guards) = (0, Vec::new());
    for v in sys.vars() {
        walk(sys.rhs(v), &mut mins, &mut guards);
    }
    mins + guards.len()
}

/// Least solution by exhaustive case analysis.
///
/// The least fixpoint of a monotone system is its least pre-fixpoint, the
/// least `x` with `rhs(x) <= x`. Each inequality decomposes: `max` into a
/// conjunction, `min` and guards into a disjunction. Every combination of
/// choices leaves a difference-constraint system whose least solution is a
/// longest-path computation; the answer is the pointwise minimum over the
/// feasible combinations. Guards with the same condition share one choice.
pub fn solve_exhaustive(sys: &BoundSystem, cap: usize) -> Result<Vec<Bound>, CapExceeded> {
    let needed = split_count(sys);
    if needed > cap {
        return Err(CapExceeded { needed, cap });
    }
    let goals: Vec<(BoundExpr, Target)> =
        sys.vars().map(|v| (sys.rhs(v).clone(), Target::Var(v.0, 0))).collect();
    let mut search = Search { n: sys.len(), best: None, guards: HashMap::new() };
    search.run(goals, Vec::new());
    Ok(search.best.expect("the all-+oo valuation satisfies some case"))
}

struct Search {
    n: usize,
    best: Option<Vec<Bound>>,
    /// Decided guard conditions: `true` means the guard holds.
    guards: HashMap<(BoundExpr, Bound), bool>,
}

impl Search {
    /// Decomposes every goal that needs no choice, then branches on one
    /// deferred `min` or guard and recurses.
    fn run(&mut self, mut goals: Vec<(BoundExpr, Target)>, mut atoms: Vec<Atom>) {
        let mut choices: Vec<(BoundExpr, Target)> = Vec::new();
        while let Some((e, t)) = goals.pop() {
            match (e, t) {
                (BoundExpr::Const(b), Target::Var(v, off)) => atoms.push(Atom::Floor { v, k: b.offset(off.saturating_neg()) }),
                (BoundExpr::Const(b), Target::Const(k)) => {
                    if b > k {
                        return;
                    }
                }
                (BoundExpr::Var(w), Target::Var(v, off)) => atoms.push(Atom::Edge { v, w: w.0, c: off.saturating_neg() }),
                (BoundExpr::Var(w), Target::Const(k)) => atoms.push(Atom::Ceil { w: w.0, k }),
                (BoundExpr::Add(a, c), Target::Var(v, off)) => goals.push((*a, Target::Var(v, off.saturating_sub(c)))),
                (BoundExpr::Add(a, c), Target::Const(k)) => goals.push((*a, Target::Const(k.offset(-c)))),
                (BoundExpr::Max(a, b), t) => {
                    goals.push((*a, t));
                    goals.push((*b, t));
                }
                (BoundExpr::Guard { test, threshold, value }, t) => match self.guards.get(&(*test.clone(), threshold)) {
                    Some(true) => goals.push((*value, t)),
                    Some(false) => {}
                    None => choices.push((BoundExpr::Guard { test, threshold, value }, t)),
                },
                (e @ BoundExpr::Min(..), t) => choices.push((e, t)),
            }
        }
        let Some((choice, t)) = choices.pop() else {
            if let Some(x) = least_solution(self.n, &atoms) {
                self.best = Some(match self.best.take() {
                    None => x,
                    Some(b) => b.into_iter().zip(x).map(|(p, q)| p.min(q)).collect(),
                });
            }
            return;
        };
        if self.pruned(&atoms) {
            return;
        }
        match choice {
            BoundExpr::Min(a, b) => {
                let mut left = choices.clone();
                left.push((*a, t));
                self.run(left, atoms.clone());
                choices.push((*b, t));
                self.run(choices, atoms);
            }
            BoundExpr::Guard { test, threshold, value } => {
                let key = (*test.clone(), threshold);
                if let Some(&holds) = self.guards.get(&key) {
                    // Decided by a sibling branch further up.
                    if holds {
                        choices.push((*value, t));
                    }
                    return self.run(choices, atoms);
                }
                // A guard fails iff its test is below the threshold or `-oo`.
                let ceil = match threshold {
                    Bound::Fin(_) => threshold.offset(-1),
                    _ => Bound::NegInf,
                };
                self.guards.insert(key.clone(), false);
                let mut fail = choices.clone();
                fail.push((*test, Target::Const(ceil)));
                self.run(fail, atoms.clone());
                self.guards.insert(key.clone(), true);
                choices.push((*value, t));
                self.run(choices, atoms);
                self.guards.remove(&key);
            }
            _ => unreachable!("only min and guard nodes are deferred"),
        }
    }
}

impl Search {
    /// Adding atoms only raises the least solution, so a partial case that is
    /// already infeasible, or no lower than the best answer anywhere, cannot
    /// contribute.
    fn pruned(&self, atoms: &[Atom]) -> bool {
        match least_solution(self.n, atoms) {
            None => true,
            Some(x) => self.best.as_ref().is_some_and(|b| b.iter().zip(&x).all(|(p, q)| p <= q)),
        }
    }
}

/// Least solution of a conjunction of atoms, or `None` if a ceiling is
/// violated. Longest paths from the floors; anything still improving after
/// `n` rounds lies on or behind a positive cycle and becomes `+oo`.
fn least_solution(n: usize, atoms: &[Atom]) -> Option<Vec<Bound>> {
    let mut x = vec![Bound::NegInf; n];
    for a in atoms {
        if let Atom::Floor { v, k } = *a {
            x[v] = x[v].max(k);
        }
    }
    let edges: Vec<(usize, usize, i64)> = atoms
        .iter()
        .filter_map(|a| match *a {
            Atom::Edge { v, w, c } => Some((v, w, c)),
            _ => None,
        })
        .collect();
    for round in 0..2 * n + 1 {
        let mut changed = false;
        for &(v, w, c) in &edges {
            let cand = x[w].offset(c);
            if cand > x[v] {
                x[v] = if round >= n { Bound::PosInf } else { cand };
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    atoms
        .iter()
        .all(|a| match *a {
            Atom::Ceil { w, k } => x[w] <= k,
            _ => true,
        })
        .then_some(x)
}

/// Flattened expression nodes, so `Max` nodes can be named by index.
#[derive(Clone, Copy, Debug)]
enum Node {
    Const(Bound),
    Var(usize),
    Add(usize, i64),
    Min(usize, usize),
    Max(usize, usize),
    Guard(usize, Bound, usize),
}

struct Flat {
    nodes: Vec<Node>,
    roots: Vec<usize>,
}

impl Flat {
    fn new(sys: &BoundSystem) -> Flat {
        let mut f = Flat { nodes: Vec::new(), roots: Vec::new() };
        for v in sys.vars() {
            let r = f.push(sys.rhs(v));
            f.roots.push(r);
        }
        f
    }

    fn push(&mut self, e: &BoundExpr) -> usize {
        let node = match e {
            BoundExpr::Const(b) => Node::Const(*b),
            BoundExpr::Var(v) => Node::Var(v.0),
            BoundExpr::Add(a, c) => Node::Add(self.push(a), *c),
            BoundExpr::Min(a, b) => Node::Min(self.push(a), self.push(b)),
            BoundExpr::Max(a, b) => Node::Max(self.push(a), self.push(b)),
            BoundExpr::Guard { test, threshold, value } => Node::Guard(self.push(test), *threshold, self.push(value)),
        };
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// With a policy, each `Max` node only evaluates its selected side
    /// (`false` = left).
    fn eval(&self, i: usize, x: &[Bound], policy: Option<&[bool]>) -> Bound {
        match self.nodes[i] {
            Node::Const(b) => b,
            Node::Var(v) => x[v],
            Node::Add(a, c) => self.eval(a, x, policy).offset(c),
            Node::Min(a, b) => self.eval(a, x, policy).min(self.eval(b, x, policy)),
            Node::Max(a, b) => match policy {
                Some(p) => self.eval(if p[i] { b } else { a }, x, policy),
                None => self.eval(a, x, None).max(self.eval(b, x, None)),
            },
            Node::Guard(t, k, v) => {
                if guard_holds(self.eval(t, x, policy), k) {
                    self.eval(v, x, policy)
                } else {
                    Bound::NegInf
                }
            }
        }
    }

    /// Points every `Max` node whose unselected side is strictly larger at
    /// `x` to that side. Returns whether anything changed.
    fn improve(&self, x: &[Bound], policy: &mut [bool]) -> bool {
        let mut changed = false;
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Max(a, b) = *node {
                let (va, vb) = (self.eval(a, x, None), self.eval(b, x, None));
                let want = if policy[i] { va <= vb } else { vb > va };
                if want != policy[i] {
                    policy[i] = want;
                    changed = true;
                }
            }
        }
        changed
    }

    /// A finite value in a least fixpoint above `x` is reached from a
    /// constant or a finite entry of `x` along at most `n` offsets.
    fn acceleration_threshold(&self, x: &[Bound]) -> i128 {
        let mut base: i128 = 0;
        let mut step: i128 = 0;
        for node in &self.nodes {
            match *node {
                Node::Const(Bound::Fin(c)) | Node::Guard(_, Bound::Fin(c), _) => base = base.max((c as i128).abs()),
                Node::Add(_, c) => step = step.max((c as i128).abs()),
                _ => {}
            }
        }
        for b in x {
            if let Bound::Fin(c) = b {
                base = base.max((*c as i128).abs());
            }
        }
        base + x.len() as i128 * step + 1
    }

    /// Least fixpoint of the policy's system above `x`, which must satisfy
    /// `x <= rhs(x)` under that policy.
    fn ascend(&self, x: &mut [Bound], policy: &[bool]) {
        let limit = self.acceleration_threshold(x);
        loop {
            let mut changed = false;
            for v in 0..x.len() {
                let mut next = self.eval(self.roots[v], x, Some(policy)).max(x[v]);
                if let Bound::Fin(c) = next {
                    if (c as i128) > limit {
                        next = Bound::PosInf;
                    }
                }
                if next != x[v] {
                    x[v] = next;
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }
}

/// Trace of an ascending policy iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyRun {
    pub solution: Vec<Bound>,
    /// Selected side of every `Max` node (in post-order of the equations,
    /// `false` = left) for each policy solved, in order.
    pub policies: Vec<Vec<bool>>,
}

/// Least solution by ascending policy iteration over `max` nodes.
///
/// Starting from all `-oo`, each round solves the `max`-free system selected
/// by the current policy for its least fixpoint above the current valuation,
/// then switches every `max` node whose other argument is strictly larger.
/// The valuations stay below the least fixpoint and increase strictly, so the
/// loop ends there.
pub fn solve_policy_iteration(sys: &BoundSystem) -> PolicyRun {
    let flat = Flat::new(sys);
    let mut x = vec![Bound::NegInf; sys.len()];
    let mut policy = vec![false; flat.nodes.len()];
    // From all-left, improvement at `-oo` picks an attaining side, ties left.
    flat.improve(&x, &mut policy);
    let mut run = PolicyRun { solution: Vec::new(), policies: Vec::new() };
    loop {
        flat.ascend(&mut x, &policy);
        run.policies.push(max_choices(&flat, &policy));
        if !flat.improve(&x, &mut policy) {
            break;
        }
    }
    run.solution = x;
    run
}

fn max_choices(flat: &Flat, policy: &[bool]) -> Vec<bool> {
    flat.nodes.iter().enumerate().filter(|(_, n)| matches!(n, Node::Max(..))).map(|(i, _)| policy[i]).collect()
}

/// Values by variable name.
pub fn named(sys: &BoundSystem, x: &[Bound]) -> Vec<(String, Bound)> {
    sys.vars().map(|v: VarId| (sys.name(v).to_string(), x[v.0])).collect()
}
