//! Classical must/may LRU age analyses.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{propagate, InitialCachePolicy};
use crate::ir::{BlockId, Cfg};

/// Per-block age bounds at one location.
///
/// `must` holds upper bounds: a listed block is cached in every state.
/// `may` holds lower bounds: an unlisted block is cached in no state.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AgeBounds {
    pub must: BTreeMap<BlockId, usize>,
    pub may: BTreeMap<BlockId, usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ApproxClass {
    AlwaysHit,
    AlwaysMiss,
    Unknown,
}

impl ApproxClass {
    pub fn name(self) -> &'static str {
        match self {
            ApproxClass::AlwaysHit => "always-hit",
            ApproxClass::AlwaysMiss => "always-miss",
            ApproxClass::Unknown => "unknown",
        }
    }
}

impl AgeBounds {
    pub fn initial(g: &Cfg, policy: InitialCachePolicy) -> Self {
        match policy {
            InitialCachePolicy::Empty => AgeBounds::default(),
            InitialCachePolicy::Unknown => AgeBounds {
                must: BTreeMap::new(),
                may: (0..g.blocks().len()).map(|b| (BlockId(b), 0)).collect(),
            },
        }
    }

    pub fn access(&self, b: BlockId, assoc: usize) -> AgeBounds {
        let ub = self.must.get(&b).copied().unwrap_or(assoc);
        let mut must: BTreeMap<BlockId, usize> = self
            .must
            .iter()
            .filter(|&(&x, _)| x != b)
            .map(|(&x, &u)| (x, if u < ub { u + 1 } else { u }))
            .filter(|&(_, u)| u < assoc)
            .collect();
        must.insert(b, 0);

        let lb = self.may.get(&b).copied();
        let mut may: BTreeMap<BlockId, usize> = self
            .may
            .iter()
            .filter(|&(&y, _)| y != b)
            .map(|(&y, &l)| (y, if lb.is_none_or(|lb| l <= lb) { l + 1 } else { l }))
            .filter(|&(_, l)| l < assoc)
            .collect();
        may.insert(b, 0);
        AgeBounds { must, may }
    }

    pub fn join(&self, other: &AgeBounds) -> AgeBounds {
        let must = self
            .must
            .iter()
            .filter_map(|(x, &u)| other.must.get(x).map(|&v| (*x, u.max(v))))
            .collect();
        let mut may = self.may.clone();
        for (&y, &l) in &other.may {
            may.entry(y).and_modify(|m| *m = (*m).min(l)).or_insert(l);
        }
        AgeBounds { must, may }
    }
}

/// Must/may bounds per location; `None` marks locations the analysis never
/// reaches.
pub fn analyze_approx(g: &Cfg, assoc: usize, policy: InitialCachePolicy) -> Vec<Option<AgeBounds>> {
    propagate(g, AgeBounds::initial(g, policy), AgeBounds::join, |b, s| s.access(b, assoc))
}

/// An unreached source yields `Unknown`: the prefilter only resolves hits and
/// misses and leaves everything else to the exact analysis.
pub fn classify_approx(bounds: Option<&AgeBounds>, b: BlockId) -> ApproxClass {
    match bounds {
        Some(s) if s.must.contains_key(&b) => ApproxClass::AlwaysHit,
        Some(s) if !s.may.contains_key(&b) => ApproxClass::AlwaysMiss,
        _ => ApproxClass::Unknown,
    }
}
