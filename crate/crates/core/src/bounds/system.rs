use std::collections::HashMap;
use std::fmt;

use crate::intervals::Bound;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Right-hand side of a bound equation. Every operator is monotone.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoundExpr {
    Const(Bound),
    Var(VarId),
    /// Never wraps a constant: `Const(b) + c` is folded at construction.
    Add(Box<BoundExpr>, i64),
    Min(Box<BoundExpr>, Box<BoundExpr>),
    Max(Box<BoundExpr>, Box<BoundExpr>),
    /// `value` if `test` is finite-or-`+oo` and at least `threshold`, else
    /// `-oo`. The threshold is an integer or `-oo`; with `-oo` the guard only
    /// asks whether `test` is reachable.
    Guard { test: Box<BoundExpr>, threshold: Bound, value: Box<BoundExpr> },
}

impl BoundExpr {
    pub const NEG_INF: BoundExpr = BoundExpr::Const(Bound::NegInf);
    pub const POS_INF: BoundExpr = BoundExpr::Const(Bound::PosInf);

    pub fn constant(c: i64) -> Self {
        BoundExpr::Const(Bound::Fin(c))
    }

    pub fn var(v: VarId) -> Self {
        BoundExpr::Var(v)
    }

    pub fn add(self, c: i64) -> Self {
        match self {
            _ if c == 0 => self,
            BoundExpr::Const(b) => BoundExpr::Const(b.offset(c)),
            BoundExpr::Add(e, d) => match d.checked_add(c) {
                Some(0) => *e,
                Some(s) => BoundExpr::Add(e, s),
                None => BoundExpr::Add(Box::new(BoundExpr::Add(e, d)), c),
            },
            e => BoundExpr::Add(Box::new(e), c),
        }
    }

    pub fn min(a: BoundExpr, b: BoundExpr) -> Self {
        match (a, b) {
            (BoundExpr::Const(x), BoundExpr::Const(y)) => BoundExpr::Const(x.min(y)),
            (BoundExpr::Const(Bound::PosInf), e) | (e, BoundExpr::Const(Bound::PosInf)) => e,
            (BoundExpr::Const(Bound::NegInf), _) | (_, BoundExpr::Const(Bound::NegInf)) => BoundExpr::NEG_INF,
            (a, b) if a == b => a,
            (a, b) => BoundExpr::Min(Box::new(a), Box::new(b)),
        }
    }

    pub fn max(a: BoundExpr, b: BoundExpr) -> Self {
        match (a, b) {
            (BoundExpr::Const(x), BoundExpr::Const(y)) => BoundExpr::Const(x.max(y)),
            (BoundExpr::Const(Bound::NegInf), e) | (e, BoundExpr::Const(Bound::NegInf)) => e,
            (BoundExpr::Const(Bound::PosInf), _) | (_, BoundExpr::Const(Bound::PosInf)) => BoundExpr::POS_INF,
            (a, b) if a == b => a,
            (a, b) => BoundExpr::Max(Box::new(a), Box::new(b)),
        }
    }

    /// Panics if `threshold` is `+oo`.
    pub fn guard(test: BoundExpr, threshold: Bound, value: BoundExpr) -> Self {
        assert!(threshold != Bound::PosInf, "guard threshold must be below +oo");
        match (test, value) {
            (_, BoundExpr::Const(Bound::NegInf)) => BoundExpr::NEG_INF,
            (BoundExpr::Const(t), v) => {
                if guard_holds(t, threshold) {
                    v
                } else {
                    BoundExpr::NEG_INF
                }
            }
            (t, v) => BoundExpr::Guard { test: Box::new(t), threshold, value: Box::new(v) },
        }
    }

    pub fn eval(&self, x: &[Bound]) -> Bound {
        match self {
            BoundExpr::Const(b) => *b,
            BoundExpr::Var(v) => x[v.0],
            BoundExpr::Add(e, c) => e.eval(x).offset(*c),
            BoundExpr::Min(a, b) => a.eval(x).min(b.eval(x)),
            BoundExpr::Max(a, b) => a.eval(x).max(b.eval(x)),
            BoundExpr::Guard { test, threshold, value } => {
                if guard_holds(test.eval(x), *threshold) {
                    value.eval(x)
                } else {
                    Bound::NegInf
                }
            }
        }
    }

    /// Number of `Min`, `Max` and `Guard` nodes.
    pub fn choice_nodes(&self) -> usize {
        match self {
            BoundExpr::Const(_) | BoundExpr::Var(_) => 0,
            BoundExpr::Add(e, _) => e.choice_nodes(),
            BoundExpr::Min(a, b) | BoundExpr::Max(a, b) => 1 + a.choice_nodes() + b.choice_nodes(),
            BoundExpr::Guard { test, value, .. } => 1 + test.choice_nodes() + value.choice_nodes(),
        }
    }

    pub fn substitute(&self, f: &impl Fn(VarId) -> BoundExpr) -> BoundExpr {
        match self {
            BoundExpr::Const(_) => self.clone(),
            BoundExpr::Var(v) => f(*v),
            BoundExpr::Add(e, c) => e.substitute(f).add(*c),
            BoundExpr::Min(a, b) => BoundExpr::min(a.substitute(f), b.substitute(f)),
            BoundExpr::Max(a, b) => BoundExpr::max(a.substitute(f), b.substitute(f)),
            BoundExpr::Guard { test, threshold, value } => {
                BoundExpr::guard(test.substitute(f), *threshold, value.substitute(f))
            }
        }
    }

    /// Drops every guard, keeping its value.
    pub fn erase_guards(&self) -> BoundExpr {
        match self {
            BoundExpr::Guard { value, .. } => value.erase_guards(),
            BoundExpr::Add(e, c) => e.erase_guards().add(*c),
            BoundExpr::Min(a, b) => BoundExpr::min(a.erase_guards(), b.erase_guards()),
            BoundExpr::Max(a, b) => BoundExpr::max(a.erase_guards(), b.erase_guards()),
            e => e.clone(),
        }
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, names: &dyn Fn(VarId) -> String) -> fmt::Result {
        match self {
            BoundExpr::Const(b) => write!(f, "{b}"),
            BoundExpr::Var(v) => write!(f, "{}", names(*v)),
            BoundExpr::Add(e, c) => {
                e.fmt_with(f, names)?;
                if *c < 0 {
                    write!(f, " - {}", c.unsigned_abs())
                } else {
                    write!(f, " + {c}")
                }
            }
            BoundExpr::Min(a, b) | BoundExpr::Max(a, b) => {
                f.write_str(if matches!(self, BoundExpr::Min(..)) { "min(" } else { "max(" })?;
                a.fmt_with(f, names)?;
                f.write_str(", ")?;
                b.fmt_with(f, names)?;
                f.write_str(")")
            }
            BoundExpr::Guard { test, threshold, value } => {
                f.write_str("guard(")?;
                test.fmt_with(f, names)?;
                write!(f, ", {threshold}, ")?;
                value.fmt_with(f, names)?;
                f.write_str(")")
            }
        }
    }
}

pub(crate) fn guard_holds(test: Bound, threshold: Bound) -> bool {
    test != Bound::NegInf && test >= threshold
}

/// A system `x = rhs(x)` with one equation per variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundSystem {
    names: Vec<String>,
    rhs: Vec<BoundExpr>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("variable `{0}` is used but never defined")]
    Undefined(String),
    #[error("variable `{0}` is defined twice")]
    Duplicate(String),
}

impl BoundSystem {
    pub fn new() -> Self {
        BoundSystem::default()
    }

    /// Declares a variable whose equation is `-oo` until [`Self::define`].
    pub fn declare(&mut self, name: impl Into<String>) -> VarId {
        self.names.push(name.into());
        self.rhs.push(BoundExpr::NEG_INF);
        VarId(self.names.len() - 1)
    }

    pub fn define(&mut self, v: VarId, rhs: BoundExpr) {
        self.rhs[v.0] = rhs;
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> {
        (0..self.names.len()).map(VarId)
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0]
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.names.iter().position(|n| n == name).map(VarId)
    }

    pub fn rhs(&self, v: VarId) -> &BoundExpr {
        &self.rhs[v.0]
    }

    pub fn eval_all(&self, x: &[Bound]) -> Vec<Bound> {
        self.rhs.iter().map(|e| e.eval(x)).collect()
    }

    pub fn is_fixpoint(&self, x: &[Bound]) -> bool {
        self.eval_all(x) == x
    }

    pub fn choice_nodes(&self) -> usize {
        self.rhs.iter().map(BoundExpr::choice_nodes).sum()
    }

    pub fn render(&self, e: &BoundExpr) -> String {
        struct Show<'a>(&'a BoundSystem, &'a BoundExpr);
        impl fmt::Display for Show<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.1.fmt_with(f, &|v| self.0.names[v.0].clone())
            }
        }
        Show(self, e).to_string()
    }

    /// Parses the `name = expr` dump format. Lines starting with `#` are
    /// comments.
    pub fn parse(text: &str) -> Result<BoundSystem, SystemError> {
        let mut defs: Vec<(usize, String, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rhs) = line
                .split_once('=')
                .ok_or_else(|| SystemError::Parse { line: i + 1, message: "expected `name = expr`".into() })?;
            let name = lhs.trim();
            if !is_name(name) {
                return Err(SystemError::Parse { line: i + 1, message: format!("bad variable name `{name}`") });
            }
            defs.push((i + 1, name.to_string(), rhs));
        }
        let mut sys = BoundSystem::new();
        let mut ids = HashMap::new();
        for (_, name, _) in &defs {
            if ids.insert(name.clone(), sys.declare(name.clone())).is_some() {
                return Err(SystemError::Duplicate(name.clone()));
            }
        }
        for (line, name, rhs) in &defs {
            let mut p = ExprParser { toks: tokenize(rhs).map_err(|m| SystemError::Parse { line: *line, message: m })?, pos: 0, ids: &ids };
            let e = p.expr().and_then(|e| p.finish().map(|_| e)).map_err(|m| match m {
                PErr::Undefined(n) => SystemError::Undefined(n),
                PErr::Msg(message) => SystemError::Parse { line: *line, message },
            })?;
            sys.define(ids[name], e);
        }
        Ok(sys)
    }
}

impl fmt::Display for BoundSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in self.vars() {
            writeln!(f, "{} = {}", self.names[v.0], self.render(&self.rhs[v.0]))?;
        }
        Ok(())
    }
}

fn is_name(s: &str) -> bool {
    let mut cs = s.chars();
    cs.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_' || c == '^')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '^')
        && !matches!(s, "min" | "max" | "guard")
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Int(i64),
    NegInf,
    PosInf,
    Plus,
    Minus,
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(n) => write!(f, "`{n}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::NegInf => f.write_str("`-oo`"),
            Tok::PosInf => f.write_str("`+oo`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
        }
    }
}

fn found(t: &Option<Tok>) -> String {
    t.as_ref().map_or_else(|| "end of line".to_string(), Tok::to_string)
}

fn tokenize(s: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' | ')' | ',' => {
                out.push(match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    _ => Tok::Comma,
                });
                i += 1;
            }
            '+' | '-' if cs.get(i + 1) == Some(&'o') && cs.get(i + 2) == Some(&'o') => {
                out.push(if c == '+' { Tok::PosInf } else { Tok::NegInf });
                i += 3;
            }
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            _ if c.is_ascii_digit() => {
                let start = i;
                while i < cs.len() && cs[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = cs[start..i].iter().collect();
                out.push(Tok::Int(text.parse().map_err(|_| format!("integer `{text}` out of range"))?));
            }
            _ if c.is_ascii_alphabetic() || c == '_' || c == '^' => {
                let start = i;
                while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_' || cs[i] == '^') {
                    i += 1;
                }
                out.push(Tok::Name(cs[start..i].iter().collect()));
            }
            _ => return Err(format!("unexpected character `{c}`")),
        }
    }
    Ok(out)
}

enum PErr {
    Undefined(String),
    Msg(String),
}

struct ExprParser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    ids: &'a HashMap<String, VarId>,
}

impl ExprParser<'_> {
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), PErr> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(PErr::Msg(format!("expected {t}, found {}", found(&got)))),
        }
    }

    fn finish(&mut self) -> Result<(), PErr> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some(t) => Err(PErr::Msg(format!("trailing input at {t}"))),
        }
    }

    fn int(&mut self) -> Result<i64, PErr> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(n),
            Some(Tok::Minus) => match self.next() {
                Some(Tok::Int(n)) => Ok(-n),
                t => Err(PErr::Msg(format!("expected integer, found {}", found(&t)))),
            },
            t => Err(PErr::Msg(format!("expected integer, found {}", found(&t)))),
        }
    }

    fn expr(&mut self) -> Result<BoundExpr, PErr> {
        let mut e = self.primary()?;
        loop {
            match self.toks.get(self.pos) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let c = self.int()?;
                    e = e.add(c);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let c = self.int()?;
                    e = e.add(c.checked_neg().ok_or_else(|| PErr::Msg("offset out of range".into()))?);
                }
                _ => return Ok(e),
            }
        }
    }

    fn primary(&mut self) -> Result<BoundExpr, PErr> {
        match self.next() {
            Some(Tok::NegInf) => Ok(BoundExpr::NEG_INF),
            Some(Tok::PosInf) => Ok(BoundExpr::POS_INF),
            Some(Tok::Int(n)) => Ok(BoundExpr::constant(n)),
            Some(Tok::Minus) => {
                self.pos -= 1;
                Ok(BoundExpr::constant(self.int()?))
            }
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Name(n)) if n == "min" || n == "max" => {
                self.expect(Tok::LParen)?;
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                let b = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(if n == "min" { raw_min(a, b) } else { raw_max(a, b) })
            }
            Some(Tok::Name(n)) if n == "guard" => {
                self.expect(Tok::LParen)?;
                let test = self.expr()?;
                self.expect(Tok::Comma)?;
                let threshold = match self.toks.get(self.pos) {
                    Some(Tok::NegInf) => {
                        self.pos += 1;
                        Bound::NegInf
                    }
                    _ => Bound::Fin(self.int()?),
                };
                self.expect(Tok::Comma)?;
                let value = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(BoundExpr::Guard { test: Box::new(test), threshold, value: Box::new(value) })
            }
            Some(Tok::Name(n)) => self.ids.get(&n).map(|&v| BoundExpr::Var(v)).ok_or(PErr::Undefined(n)),
            t => Err(PErr::Msg(format!("expected expression, found {}", found(&t)))),
        }
    }
}

// The parser keeps the written shape so dumps round-trip exactly.
fn raw_min(a: BoundExpr, b: BoundExpr) -> BoundExpr {
    BoundExpr::Min(Box::new(a), Box::new(b))
}

fn raw_max(a: BoundExpr, b: BoundExpr) -> BoundExpr {
    BoundExpr::Max(Box::new(a), Box::new(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trips() {
        let text = "h = min(max(min(42, h + 1), h), 999)\ng = guard(h, -3, max(g - 2, -oo))\nk = guard(g, -oo, +oo)\n";
        let sys = BoundSystem::parse(text).unwrap();
        assert_eq!(sys.to_string(), text);
        assert_eq!(BoundSystem::parse(&sys.to_string()).unwrap(), sys);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(BoundSystem::parse("h = x + 1"), Err(SystemError::Undefined("x".into())));
        let e = BoundSystem::parse("h = ").unwrap_err().to_string();
        assert!(e.ends_with("expected expression, found end of line"), "{e}");
        let e = BoundSystem::parse("h = min(1 2)").unwrap_err().to_string();
        assert!(e.ends_with("expected `,`, found `2`"), "{e}");
        assert_eq!(BoundSystem::parse("h = 1\nh = 2"), Err(SystemError::Duplicate("h".into())));
        assert!(matches!(BoundSystem::parse("h = min(1 2)"), Err(SystemError::Parse { line: 1, .. })));
        assert!(matches!(BoundSystem::parse("\nh 1"), Err(SystemError::Parse { line: 2, .. })));
    }

    #[test]
    fn smart_constructors_fold() {
        let h = BoundExpr::var(VarId(0));
        assert_eq!(BoundExpr::NEG_INF.add(5), BoundExpr::NEG_INF);
        assert_eq!(h.clone().add(2).add(-2), h);
        assert_eq!(BoundExpr::max(BoundExpr::NEG_INF, h.clone()), h);
        assert_eq!(BoundExpr::min(BoundExpr::POS_INF, h.clone()), h);
        assert_eq!(BoundExpr::guard(BoundExpr::constant(3), Bound::Fin(4), h.clone()), BoundExpr::NEG_INF);
        assert_eq!(BoundExpr::guard(BoundExpr::constant(4), Bound::Fin(4), h.clone()), h);
    }

    #[test]
    fn eval_guard() {
        let sys = BoundSystem::parse("x = guard(x, 0, 7)").unwrap();
        assert_eq!(sys.eval_all(&[Bound::NegInf]), [Bound::NegInf]);
        assert_eq!(sys.eval_all(&[Bound::Fin(-1)]), [Bound::NegInf]);
        assert_eq!(sys.eval_all(&[Bound::Fin(0)]), [Bound::Fin(7)]);
        assert_eq!(sys.eval_all(&[Bound::PosInf]), [Bound::Fin(7)]);
        let reach = BoundSystem::parse("x = guard(x, -oo, 7)").unwrap();
        assert_eq!(reach.eval_all(&[Bound::Fin(-100)]), [Bound::Fin(7)]);
    }
}
