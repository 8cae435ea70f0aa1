use std::collections::BTreeMap;

use super::domain::{AbstractEnv, Bound, Interval};
use crate::ir::{Cond, Expr, RelOp};

/// Interval evaluation; `*` is unconstrained.
pub fn eval(e: &Expr, env: &AbstractEnv) -> Interval {
    if env.is_unreachable() {
        return Interval::Bottom;
    }
    match e {
        Expr::Const(c) => Interval::constant(*c),
        Expr::Var(v) => env.get(v),
        Expr::Add(l, r) => eval(l, env).add(&eval(r, env)),
        Expr::Sub(l, r) => eval(l, env).sub(&eval(r, env)),
        Expr::Nondet => Interval::TOP,
    }
}

/// Pushes the constraint `e in target` back onto the variables of `e`.
/// Returns false when the constraint is unsatisfiable.
fn refine(e: &Expr, target: Interval, env: &mut BTreeMap<String, Interval>) -> bool {
    let snapshot = AbstractEnv::Env(env.clone());
    let t = eval(e, &snapshot).meet(&target);
    if t.is_bottom() {
        return false;
    }
    match e {
        Expr::Const(_) | Expr::Nondet => true,
        Expr::Var(v) => {
            let cur = env.get(v).copied().unwrap_or(Interval::TOP);
            let next = cur.meet(&t);
            env.insert(v.clone(), next);
            !next.is_bottom()
        }
        Expr::Add(l, r) => {
            let (lv, rv) = (eval(l, &snapshot), eval(r, &snapshot));
            refine(l, t.sub(&rv), env) && refine(r, t.sub(&lv), env)
        }
        Expr::Sub(l, r) => {
            let (lv, rv) = (eval(l, &snapshot), eval(r, &snapshot));
            refine(l, t.add(&rv), env) && refine(r, lv.sub(&t), env)
        }
    }
}

/// Sound guard refinement. Integer semantics: `x > c` is `x >= c + 1`.
pub fn filter(c: &Cond, env: &AbstractEnv) -> AbstractEnv {
    let AbstractEnv::Env(m) = env else {
        return AbstractEnv::Unreachable;
    };
    match c {
        Cond::Nondet | Cond::Bool(true) => env.clone(),
        Cond::Bool(false) => AbstractEnv::Unreachable,
        Cond::Cmp(l, op, r) => {
            let diff = Expr::sub(l.clone(), r.clone());
            let d = eval(&diff, env);
            let fin = |lo: Bound, hi: Bound| Interval::new(lo, hi);
            let target = match op {
                RelOp::Lt => fin(Bound::NegInf, Bound::Fin(-1)),
                RelOp::Le => fin(Bound::NegInf, Bound::Fin(0)),
                RelOp::Gt => fin(Bound::Fin(1), Bound::PosInf),
                RelOp::Ge => fin(Bound::Fin(0), Bound::PosInf),
                RelOp::Eq => Interval::constant(0),
                RelOp::Ne => {
                    if d == Interval::constant(0) {
                        return AbstractEnv::Unreachable;
                    } else if d.lo() == Some(Bound::Fin(0)) {
                        fin(Bound::Fin(1), Bound::PosInf)
                    } else if d.hi() == Some(Bound::Fin(0)) {
                        fin(Bound::NegInf, Bound::Fin(-1))
                    } else {
                        Interval::TOP
                    }
                }
            };
            let mut out = m.clone();
            if refine(&diff, target, &mut out) {
                AbstractEnv::Env(out)
            } else {
                AbstractEnv::Unreachable
            }
        }
    }
}

/// Interval assignment `var = e`.
pub fn assign(var: &str, e: &Expr, env: &AbstractEnv) -> AbstractEnv {
    let v = eval(e, env);
    env.clone().with(var, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, Interval)]) -> AbstractEnv {
        AbstractEnv::Env(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    fn gt(var: &str, c: i64) -> Cond {
        Cond::Cmp(Expr::var(var), RelOp::Gt, Expr::Const(c))
    }

    #[test]
    fn eval_examples() {
        let e = env(&[("x", Interval::finite(0, 1)), ("y", Interval::finite(0, 1))]);
        assert_eq!(eval(&Expr::sub(Expr::var("x"), Expr::var("y")), &e), Interval::finite(-1, 1));
        assert_eq!(eval(&Expr::Const(7), &e), Interval::constant(7));
        let e = env(&[("x", Interval::finite(0, 41))]);
        assert_eq!(eval(&Expr::add(Expr::var("x"), Expr::Const(1)), &e), Interval::finite(1, 42));
        assert_eq!(eval(&Expr::Nondet, &e), Interval::TOP);
    }

    #[test]
    fn filter_examples() {
        let e = env(&[("i", Interval::finite(0, 43))]);
        assert_eq!(filter(&gt("i", 42), &e).get("i"), Interval::constant(43));
        let e = env(&[("j", Interval::TOP)]);
        assert_eq!(filter(&gt("j", 0), &e).get("j"), Interval::Range(Bound::Fin(1), Bound::PosInf));
        let e = env(&[("i", Interval::finite(0, 10))]);
        assert!(filter(&gt("i", 42), &e).is_unreachable());
    }

    #[test]
    fn filter_constant_on_left_and_two_vars() {
        let c = Cond::Cmp(Expr::Const(5), RelOp::Ge, Expr::var("x"));
        let e = env(&[("x", Interval::finite(0, 10))]);
        assert_eq!(filter(&c, &e).get("x"), Interval::finite(0, 5));
        let c = Cond::Cmp(Expr::var("x"), RelOp::Lt, Expr::var("y"));
        let e = env(&[("x", Interval::finite(0, 10)), ("y", Interval::finite(0, 3))]);
        let f = filter(&c, &e);
        assert_eq!(f.get("x"), Interval::finite(0, 2));
        assert_eq!(f.get("y"), Interval::finite(1, 3));
    }

    #[test]
    fn filter_equalities() {
        let e = env(&[("x", Interval::finite(0, 10))]);
        let ne = |c| Cond::Cmp(Expr::var("x"), RelOp::Ne, Expr::Const(c));
        assert_eq!(filter(&ne(0), &e).get("x"), Interval::finite(1, 10));
        assert_eq!(filter(&ne(10), &e).get("x"), Interval::finite(0, 9));
        assert_eq!(filter(&ne(5), &e).get("x"), Interval::finite(0, 10));
        let eq = Cond::Cmp(Expr::var("x"), RelOp::Eq, Expr::Const(4));
        assert_eq!(filter(&eq, &e).get("x"), Interval::constant(4));
        let pinned = env(&[("x", Interval::constant(3))]);
        assert!(filter(&ne(3), &pinned).is_unreachable());
    }
}
