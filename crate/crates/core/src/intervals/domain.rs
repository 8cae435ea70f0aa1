use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

/// An integer extended with both infinities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    NegInf,
    Fin(i64),
    PosInf,
}

impl Bound {
    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Fin(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Bound::Fin(n) => Some(n),
            _ => None,
        }
    }

    /// Adds a constant; infinities absorb it and overflow saturates to the
    /// infinity of the same sign.
    pub fn offset(self, c: i64) -> Bound {
        match self {
            Bound::Fin(n) => match n.checked_add(c) {
                Some(m) => Bound::Fin(m),
                None if c > 0 => Bound::PosInf,
                None => Bound::NegInf,
            },
            b => b,
        }
    }

    pub fn neg(self) -> Bound {
        match self {
            Bound::NegInf => Bound::PosInf,
            Bound::PosInf => Bound::NegInf,
            Bound::Fin(n) => n.checked_neg().map(Bound::Fin).unwrap_or(Bound::PosInf),
        }
    }

    /// Sum for lower endpoints: `-oo` is absorbing.
    fn add_lo(self, o: Bound) -> Bound {
        match (self, o) {
            (Bound::NegInf, _) | (_, Bound::NegInf) => Bound::NegInf,
            (Bound::PosInf, _) | (_, Bound::PosInf) => Bound::PosInf,
            (Bound::Fin(a), Bound::Fin(b)) => a.checked_add(b).map(Bound::Fin).unwrap_or(Bound::NegInf),
        }
    }

    /// Sum for upper endpoints: `+oo` is absorbing.
    fn add_hi(self, o: Bound) -> Bound {
        match (self, o) {
            (Bound::PosInf, _) | (_, Bound::PosInf) => Bound::PosInf,
            (Bound::NegInf, _) | (_, Bound::NegInf) => Bound::NegInf,
            (Bound::Fin(a), Bound::Fin(b)) => a.checked_add(b).map(Bound::Fin).unwrap_or(Bound::PosInf),
        }
    }
}

impl From<i64> for Bound {
    fn from(n: i64) -> Self {
        Bound::Fin(n)
    }
}

/// Accepts an integer, `-oo`, or `+oo` (also `oo`).
impl std::str::FromStr for Bound {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "-oo" => Ok(Bound::NegInf),
            "+oo" | "oo" => Ok(Bound::PosInf),
            t => t.parse().map(Bound::Fin),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => write!(f, "-oo"),
            Bound::PosInf => write!(f, "+oo"),
            Bound::Fin(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Bound::Fin(n) => s.serialize_i64(*n),
            b => s.serialize_str(&b.to_string()),
        }
    }
}

/// Integer interval; `Bottom` is the empty interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Interval {
    Bottom,
    /// Invariant: `lo <= hi`, `lo != +oo`, `hi != -oo`.
    Range(Bound, Bound),
}

impl Interval {
    pub const TOP: Interval = Interval::Range(Bound::NegInf, Bound::PosInf);

    /// Normalizes empty bounds to `Bottom`.
    pub fn new(lo: Bound, hi: Bound) -> Interval {
        if lo > hi || lo == Bound::PosInf || hi == Bound::NegInf {
            Interval::Bottom
        } else {
            Interval::Range(lo, hi)
        }
    }

    pub fn constant(c: i64) -> Interval {
        Interval::Range(Bound::Fin(c), Bound::Fin(c))
    }

    pub fn finite(lo: i64, hi: i64) -> Interval {
        Interval::new(Bound::Fin(lo), Bound::Fin(hi))
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, Interval::Bottom)
    }

    pub fn lo(&self) -> Option<Bound> {
        match self {
            Interval::Range(lo, _) => Some(*lo),
            Interval::Bottom => None,
        }
    }

    pub fn hi(&self) -> Option<Bound> {
        match self {
            Interval::Range(_, hi) => Some(*hi),
            Interval::Bottom => None,
        }
    }

    pub fn contains(&self, v: i64) -> bool {
        match self {
            Interval::Range(lo, hi) => *lo <= Bound::Fin(v) && Bound::Fin(v) <= *hi,
            Interval::Bottom => false,
        }
    }

    pub fn leq(&self, o: &Interval) -> bool {
        match (self, o) {
            (Interval::Bottom, _) => true,
            (_, Interval::Bottom) => false,
            (Interval::Range(a, b), Interval::Range(c, d)) => c <= a && b <= d,
        }
    }

    pub fn join(&self, o: &Interval) -> Interval {
        match (self, o) {
            (Interval::Bottom, x) | (x, Interval::Bottom) => *x,
            (Interval::Range(a, b), Interval::Range(c, d)) => Interval::Range(*a.min(c), *b.max(d)),
        }
    }

    pub fn meet(&self, o: &Interval) -> Interval {
        match (self, o) {
            (Interval::Bottom, _) | (_, Interval::Bottom) => Interval::Bottom,
            (Interval::Range(a, b), Interval::Range(c, d)) => Interval::new(*a.max(c), *b.min(d)),
        }
    }

    /// Standard widening: an unstable bound jumps to the matching infinity.
    pub fn widen(&self, new: &Interval) -> Interval {
        match (self, new) {
            (Interval::Bottom, x) => *x,
            (x, Interval::Bottom) => *x,
            (Interval::Range(a, b), Interval::Range(c, d)) => {
                let lo = if c < a { Bound::NegInf } else { *a };
                let hi = if d > b { Bound::PosInf } else { *b };
                Interval::Range(lo, hi)
            }
        }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        match (self, o) {
            (Interval::Range(a, b), Interval::Range(c, d)) => Interval::new(a.add_lo(*c), b.add_hi(*d)),
            _ => Interval::Bottom,
        }
    }

    pub fn neg(&self) -> Interval {
        match self {
            Interval::Range(a, b) => Interval::Range(b.neg(), a.neg()),
            Interval::Bottom => Interval::Bottom,
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        self.add(&o.neg())
    }
}

impl PartialOrd for Interval {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match (self.leq(o), o.leq(self)) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => None,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Bottom => write!(f, "bot"),
            Interval::Range(lo, hi) => write!(f, "[{lo}, {hi}]"),
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Per-variable intervals, or the unreachable environment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbstractEnv {
    Unreachable,
    /// Invariant: no component is `Bottom`.
    Env(BTreeMap<String, Interval>),
}

impl AbstractEnv {
    /// Every listed variable unconstrained.
    pub fn top<S: AsRef<str>>(vars: &[S]) -> AbstractEnv {
        AbstractEnv::Env(vars.iter().map(|v| (v.as_ref().to_string(), Interval::TOP)).collect())
    }

    /// Sets one variable; a `Bottom` value collapses the environment.
    pub fn with(mut self, var: &str, value: Interval) -> AbstractEnv {
        self.set(var, value);
        self
    }

    pub fn set(&mut self, var: &str, value: Interval) {
        if value.is_bottom() {
            *self = AbstractEnv::Unreachable;
        } else if let AbstractEnv::Env(m) = self {
            m.insert(var.to_string(), value);
        }
    }

    pub fn is_unreachable(&self) -> bool {
        matches!(self, AbstractEnv::Unreachable)
    }

    /// The interval of `var`; `Bottom` when unreachable, top when unknown.
    pub fn get(&self, var: &str) -> Interval {
        match self {
            AbstractEnv::Unreachable => Interval::Bottom,
            AbstractEnv::Env(m) => m.get(var).copied().unwrap_or(Interval::TOP),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = (&String, &Interval)> {
        let m = match self {
            AbstractEnv::Env(m) => Some(m),
            AbstractEnv::Unreachable => None,
        };
        m.into_iter().flat_map(|m| m.iter())
    }

    fn combine(&self, o: &AbstractEnv, f: impl Fn(&Interval, &Interval) -> Interval) -> AbstractEnv {
        match (self, o) {
            (AbstractEnv::Env(a), AbstractEnv::Env(b)) => {
                let mut out = AbstractEnv::Env(BTreeMap::new());
                for k in a.keys().chain(b.keys()) {
                    out.set(k, f(&self.get(k), &o.get(k)));
                }
                out
            }
            _ => unreachable!("combine on unreachable environments"),
        }
    }

    pub fn join(&self, o: &AbstractEnv) -> AbstractEnv {
        match (self, o) {
            (AbstractEnv::Unreachable, x) | (x, AbstractEnv::Unreachable) => x.clone(),
            _ => self.combine(o, Interval::join),
        }
    }

    pub fn meet(&self, o: &AbstractEnv) -> AbstractEnv {
        match (self, o) {
            (AbstractEnv::Unreachable, _) | (_, AbstractEnv::Unreachable) => AbstractEnv::Unreachable,
            _ => self.combine(o, Interval::meet),
        }
    }

    pub fn widen(&self, new: &AbstractEnv) -> AbstractEnv {
        match (self, new) {
            (AbstractEnv::Unreachable, x) | (x, AbstractEnv::Unreachable) => x.clone(),
            _ => self.combine(new, Interval::widen),
        }
    }

    pub fn leq(&self, o: &AbstractEnv) -> bool {
        match (self, o) {
            (AbstractEnv::Unreachable, _) => true,
            (_, AbstractEnv::Unreachable) => false,
            (AbstractEnv::Env(a), AbstractEnv::Env(b)) => {
                a.keys().chain(b.keys()).all(|k| self.get(k).leq(&o.get(k)))
            }
        }
    }
}

impl fmt::Display for AbstractEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractEnv::Unreachable => write!(f, "unreachable"),
            AbstractEnv::Env(m) => {
                let parts: Vec<String> = m.iter().map(|(k, v)| format!("{k} in {v}")).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
        }
    }
}
