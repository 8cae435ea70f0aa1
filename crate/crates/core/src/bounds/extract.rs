//! Bound equations for a single-variable program.
//!
//! Each location gets two unknowns: `hi_L`, the upper end of the variable's
//! interval, and `nlo_L`, the negated lower end. Both are `-oo` exactly when
//! the location is unreached. Keeping the lower end in the same system lets
//! guards decide branch feasibility: `v <= c` passes iff `-nlo <= c`, which a
//! guard node expresses without leaving the monotone fragment.

use std::collections::HashSet;

use super::system::{BoundExpr, BoundSystem, VarId};
use crate::intervals::{Bound, Interval};
use crate::ir::{Cfg, Cond, Edge, Expr, Label, LocId, RelOp};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("{}unsupported statement `{stmt}`: {reason}", line_prefix(*line))]
    Unsupported { line: Option<u32>, stmt: String, reason: String },
    #[error("`{0}` is not a program variable")]
    UnknownVar(String),
}

fn line_prefix(line: Option<u32>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

/// An extracted system and the unknowns belonging to each location.
#[derive(Clone, Debug)]
pub struct Extracted {
    pub system: BoundSystem,
    pub var: String,
    pub hi: Vec<VarId>,
    pub nlo: Vec<VarId>,
}

impl Extracted {
    pub fn interval(&self, x: &[Bound], l: LocId) -> Interval {
        let (u, n) = (x[self.hi[l.0].0], x[self.nlo[l.0].0]);
        if u == Bound::NegInf {
            Interval::Bottom
        } else {
            Interval::new(n.neg(), u)
        }
    }

    pub fn intervals(&self, x: &[Bound]) -> Vec<Interval> {
        (0..self.hi.len()).map(|l| self.interval(x, LocId(l))).collect()
    }
}

/// Builds the bound system of `var` for a program whose only effects on it
/// are `v = c`, `v = v + c`, and comparisons of `v` with constants. `!=` is
/// excluded, so `==` only works where no negation is taken, as in `assert`.
/// `entry` is the variable's interval at the entry.
pub fn extract_upper_bounds(g: &Cfg, var: &str, entry: Interval) -> Result<Extracted, ExtractError> {
    if !g.vars().iter().any(|v| v == var) {
        return Err(ExtractError::UnknownVar(var.to_string()));
    }
    let mut sys = BoundSystem::new();
    let names = unknown_names(g);
    let hi: Vec<VarId> = names.iter().map(|n| sys.declare(format!("hi_{n}"))).collect();
    let nlo: Vec<VarId> = names.iter().map(|n| sys.declare(format!("nlo_{n}"))).collect();
    let mut his: Vec<BoundExpr> = vec![BoundExpr::NEG_INF; g.num_locations()];
    let mut nlos = his.clone();
    if let Interval::Range(lo, up) = entry {
        his[g.entry().0] = BoundExpr::Const(up);
        nlos[g.entry().0] = BoundExpr::Const(lo.neg());
    }
    for e in g.edges() {
        let (u, n) = (BoundExpr::var(hi[e.src.0]), BoundExpr::var(nlo[e.src.0]));
        let (u2, n2) = edge_transfer(g, e, var, u, n)?;
        let d = e.dst.0;
        his[d] = BoundExpr::max(std::mem::replace(&mut his[d], BoundExpr::NEG_INF), u2);
        nlos[d] = BoundExpr::max(std::mem::replace(&mut nlos[d], BoundExpr::NEG_INF), n2);
    }
    for (l, (u, n)) in his.into_iter().zip(nlos).enumerate() {
        sys.define(hi[l], u);
        sys.define(nlo[l], n);
    }
    Ok(Extracted { system: sys, var: var.to_string(), hi, nlo })
}

/// Location names usable as unknown names, falling back to `L<index>`.
fn unknown_names(g: &Cfg) -> Vec<String> {
    let clean = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '^');
    let mut seen = HashSet::new();
    g.locations()
        .map(|l| {
            let name = &g.info(l).name;
            if clean(name) && seen.insert(name.clone()) {
                name.clone()
            } else {
                format!("L{}", l.0)
            }
        })
        .collect()
}

fn edge_transfer(
    g: &Cfg,
    e: &Edge,
    var: &str,
    u: BoundExpr,
    n: BoundExpr,
) -> Result<(BoundExpr, BoundExpr), ExtractError> {
    let unsupported = |stmt: String, reason: &str| ExtractError::Unsupported {
        // Statement lines sit on the location a statement leads to.
        line: g.info(e.dst).line.or(g.info(e.src).line),
        stmt,
        reason: reason.to_string(),
    };
    match &e.label {
        Label::Nop | Label::Access { .. } => Ok((u, n)),
        Label::Assign(w, rhs) => {
            let stmt = format!("{w} = {rhs}");
            if w != var {
                return Err(unsupported(stmt, &format!("only `{var}` may be assigned")));
            }
            match linear(rhs, var) {
                Some((0, c)) => {
                    let nc = c.checked_neg().ok_or_else(|| unsupported(stmt.clone(), "constant out of range"))?;
                    Ok((BoundExpr::guard(u.clone(), Bound::NegInf, BoundExpr::constant(c)), BoundExpr::guard(u, Bound::NegInf, BoundExpr::constant(nc))))
                }
                Some((1, c)) => {
                    let nc = c.checked_neg().ok_or_else(|| unsupported(stmt.clone(), "constant out of range"))?;
                    Ok((u.add(c), n.add(nc)))
                }
                _ => Err(unsupported(stmt, &format!("only `{var} = c` and `{var} = {var} + c` are supported"))),
            }
        }
        Label::Assume(cond) => match cond {
            Cond::Nondet | Cond::Bool(true) => Ok((u, n)),
            Cond::Bool(false) => Ok((BoundExpr::NEG_INF, BoundExpr::NEG_INF)),
            Cond::Cmp(l, op, r) => {
                let stmt = cond.to_string();
                let (a, k) = match (linear(l, var), linear(r, var)) {
                    (Some((a1, k1)), Some((a2, k2))) => (a1 - a2, k1.checked_sub(k2)),
                    _ => (i64::MAX, None),
                };
                let bad = || unsupported(stmt.clone(), &format!("only comparisons of `{var}` with constants are supported"));
                let k = k.ok_or_else(bad)?;
                // a*v + k op 0
                let (op, c) = match a {
                    0 => return Ok(if op.holds(k, 0) { (u, n) } else { (BoundExpr::NEG_INF, BoundExpr::NEG_INF) }),
                    1 => (*op, k.checked_neg().ok_or_else(bad)?),
                    -1 => (op.flip(), k),
                    _ => return Err(bad()),
                };
                let neg = |c: i64| c.checked_neg().ok_or_else(bad);
                Ok(match op {
                    RelOp::Le | RelOp::Lt => {
                        let c = if op == RelOp::Lt { c.checked_sub(1).ok_or_else(bad)? } else { c };
                        let t = neg(c)?;
                        (
                            BoundExpr::guard(n.clone(), Bound::Fin(t), BoundExpr::min(u, BoundExpr::constant(c))),
                            BoundExpr::guard(n.clone(), Bound::Fin(t), n),
                        )
                    }
                    RelOp::Ge | RelOp::Gt => {
                        let c = if op == RelOp::Gt { c.checked_add(1).ok_or_else(bad)? } else { c };
                        let t = neg(c)?;
                        (
                            BoundExpr::guard(u.clone(), Bound::Fin(c), u.clone()),
                            BoundExpr::guard(u, Bound::Fin(c), BoundExpr::min(n, BoundExpr::constant(t))),
                        )
                    }
                    RelOp::Eq => {
                        let t = neg(c)?;
                        let both = |val: i64| {
                            BoundExpr::guard(u.clone(), Bound::Fin(c), BoundExpr::guard(n.clone(), Bound::Fin(t), BoundExpr::constant(val)))
                        };
                        (both(c), both(t))
                    }
                    RelOp::Ne => {
                        return Err(unsupported(stmt, "`!=` has no monotone bound equation"));
                    }
                })
            }
        },
    }
}

/// `e` as `a * var + k`, if it is linear in `var` and mentions nothing else.
fn linear(e: &Expr, var: &str) -> Option<(i64, i64)> {
    match e {
        Expr::Const(c) => Some((0, *c)),
        Expr::Var(v) if v == var => Some((1, 0)),
        Expr::Add(l, r) => {
            let ((a, b), (c, d)) = (linear(l, var)?, linear(r, var)?);
            Some((a.checked_add(c)?, b.checked_add(d)?))
        }
        Expr::Sub(l, r) => {
            let ((a, b), (c, d)) = (linear(l, var)?, linear(r, var)?);
            Some((a.checked_sub(c)?, b.checked_sub(d)?))
        }
        Expr::Var(_) | Expr::Nondet => None,
    }
}
