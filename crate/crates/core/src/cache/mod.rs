//! LRU cache-set analyses: a concrete simulator and collecting oracle, the
//! classical must/may prefilter, and the exact focused analysis.
//!
//! All analyses work on the control-flow model of a graph: only `Access`
//! labels have an effect, every other label behaves as `Nop`.

pub mod approx;
pub mod concrete;
pub mod exact;

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::ir::{BlockId, Cfg, Label, LocId};

pub use approx::{analyze_approx, classify_approx, AgeBounds, ApproxClass};
pub use concrete::{
    classify_oracle, collect_states, collect_states_from, CacheSetState, DEFAULT_STATE_BUDGET,
};
pub use exact::{
    analyze_block, classify_exact, classify_exact_blocks, classify_pipeline, prefilter, resolve_open_sites, BlockView, Method,
    PipelineReport,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub enum InitialCachePolicy {
    /// The cache set starts empty.
    #[default]
    Empty,
    /// Any content over the graph's blocks plus one block foreign to the graph.
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Classification {
    AlwaysHit,
    AlwaysMiss,
    /// Both a hitting and a missing execution reach the access.
    Variable,
    Unreachable,
}

impl Classification {
    pub fn from_exists(exists_hit: bool, exists_miss: bool) -> Self {
        match (exists_hit, exists_miss) {
            (true, false) => Classification::AlwaysHit,
            (false, true) => Classification::AlwaysMiss,
            (true, true) => Classification::Variable,
            (false, false) => Classification::Unreachable,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Classification::AlwaysHit => "always-hit",
            Classification::AlwaysMiss => "always-miss",
            Classification::Variable => "variable",
            Classification::Unreachable => "unreachable",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CacheError {
    #[error("associativity must be at least 1")]
    ZeroAssociativity,
    #[error("state budget of {0} exceeded; the instance is too large for the explicit oracle")]
    BudgetExceeded(usize),
}

/// Block id standing for the content foreign to the graph under
/// [`InitialCachePolicy::Unknown`].
pub fn other_block(g: &Cfg) -> BlockId {
    BlockId(g.blocks().len())
}

/// Chaotic iteration of a finite-height analysis. `None` is the unreached
/// state; the transfer is only called on `Access` edges.
pub(crate) fn propagate<S: Clone + PartialEq>(
    g: &Cfg,
    init: S,
    join: impl Fn(&S, &S) -> S,
    access: impl Fn(BlockId, &S) -> S,
) -> Vec<Option<S>> {
    let n = g.num_locations();
    let mut states: Vec<Option<S>> = vec![None; n];
    states[g.entry().0] = Some(init);
    let mut queued = vec![false; n];
    let mut work = VecDeque::from([g.entry()]);
    queued[g.entry().0] = true;
    while let Some(l) = work.pop_front() {
        queued[l.0] = false;
        let Some(s) = states[l.0].clone() else { continue };
        for e in g.out_edges(l) {
            let out = match e.label {
                Label::Access { block, .. } => access(block, &s),
                _ => s.clone(),
            };
            let d: LocId = e.dst;
            let next = match &states[d.0] {
                None => out,
                Some(old) => join(old, &out),
            };
            if states[d.0].as_ref() != Some(&next) {
                states[d.0] = Some(next);
                if !queued[d.0] {
                    queued[d.0] = true;
                    work.push_back(d);
                }
            }
        }
    }
    states
}
