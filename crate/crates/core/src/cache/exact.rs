//! Exact focused analysis: for one block, whether it may be absent plus the
//! antichain of younger-sets it can have when present.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::approx::{analyze_approx, classify_approx, ApproxClass};
use super::{other_block, propagate, Classification, InitialCachePolicy};
use crate::antichain::{Antichain, BlockSet, Orientation};
use crate::ir::{BlockId, Cfg, SiteId};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BlockView {
    pub may_absent: bool,
    pub younger: Antichain,
}

impl BlockView {
    /// The unreached view.
    pub fn bottom(o: Orientation) -> Self {
        BlockView { may_absent: false, younger: Antichain::empty(o) }
    }

    pub fn is_bottom(&self) -> bool {
        !self.may_absent && self.younger.is_empty()
    }

    pub fn exists_hit(&self) -> bool {
        !self.younger.is_empty()
    }

    pub fn initial(g: &Cfg, focus: BlockId, assoc: usize, o: Orientation, policy: InitialCachePolicy) -> Self {
        match (policy, o) {
            (InitialCachePolicy::Empty, _) => BlockView { may_absent: true, younger: Antichain::empty(o) },
            (InitialCachePolicy::Unknown, Orientation::KeepMin) => {
                BlockView { may_absent: true, younger: Antichain::from_sets(o, [BlockSet::new()]) }
            }
            (InitialCachePolicy::Unknown, Orientation::KeepMax) => {
                let others: Vec<BlockId> = (0..=other_block(g).0).map(BlockId).filter(|&b| b != focus).collect();
                let k = (assoc - 1).min(others.len());
                BlockView { may_absent: true, younger: Antichain::from_sets(o, subsets_of_size(&others, k)) }
            }
        }
    }

    pub fn transfer(&self, accessed: BlockId, focus: BlockId, assoc: usize) -> BlockView {
        let o = self.younger.orientation();
        if self.is_bottom() {
            return self.clone();
        }
        if accessed == focus {
            return BlockView { may_absent: false, younger: Antichain::from_sets(o, [BlockSet::new()]) };
        }
        let mut evicted = false;
        let younger = self.younger.filter_map(|s| {
            if s.contains(accessed) {
                Some(s.clone())
            } else if s.len() + 1 < assoc {
                Some(s.with(accessed))
            } else {
                evicted = true;
                None
            }
        });
        BlockView { may_absent: self.may_absent || evicted, younger }
    }

    pub fn join(&self, other: &BlockView) -> BlockView {
        BlockView {
            may_absent: self.may_absent || other.may_absent,
            younger: self.younger.union(&other.younger).expect("views of one analysis share an orientation"),
        }
    }

    /// The abstract order used for convergence.
    pub fn subsumes(&self, other: &BlockView) -> bool {
        (self.may_absent || !other.may_absent)
            && self.younger.subsumes(&other.younger).expect("views of one analysis share an orientation")
    }
}

impl fmt::Debug for BlockView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(absent: {}, {:?})", self.may_absent, self.younger)
    }
}

fn subsets_of_size(items: &[BlockId], k: usize) -> Vec<BlockSet> {
    if k == 0 {
        return vec![BlockSet::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let (first, rest) = (items[0], &items[1..]);
    let mut out: Vec<BlockSet> = subsets_of_size(rest, k - 1).into_iter().map(|s| s.with(first)).collect();
    out.extend(subsets_of_size(rest, k));
    out
}

/// Least fixpoint of the focused analysis. Unreached locations hold the
/// bottom view.
pub fn analyze_block(
    g: &Cfg,
    focus: BlockId,
    assoc: usize,
    o: Orientation,
    policy: InitialCachePolicy,
) -> Vec<BlockView> {
    assert!(assoc >= 1, "associativity must be at least 1");
    let init = BlockView::initial(g, focus, assoc, o, policy);
    propagate(g, init, BlockView::join, |b, v| v.transfer(b, focus, assoc))
        .into_iter()
        .map(|v| v.unwrap_or_else(|| BlockView::bottom(o)))
        .collect()
}

/// Exact classification of every access to the given blocks.
///
/// Misses come from the `KeepMax` run, where every retained younger-set
/// stands for its subsets and thus evicts no later than any of them. Hits come
/// from the `KeepMin` run, where retained sets survive at least as long as
/// their supersets. The `KeepMin` run's own absence flag can under-report
/// evictions and is not consulted.
pub fn classify_exact_blocks(
    g: &Cfg,
    assoc: usize,
    policy: InitialCachePolicy,
    blocks: &BTreeSet<BlockId>,
) -> BTreeMap<SiteId, Classification> {
    let sites = g.access_sites();
    let mut out = BTreeMap::new();
    for &focus in blocks {
        let max = analyze_block(g, focus, assoc, Orientation::KeepMax, policy);
        let min = analyze_block(g, focus, assoc, Orientation::KeepMin, policy);
        for s in sites.iter().filter(|s| s.block == focus) {
            let exists_miss = max[s.src.0].may_absent;
            let exists_hit = min[s.src.0].exists_hit();
            out.insert(s.site, Classification::from_exists(exists_hit, exists_miss));
        }
    }
    out
}

pub fn classify_exact(g: &Cfg, assoc: usize, policy: InitialCachePolicy) -> BTreeMap<SiteId, Classification> {
    let blocks = g.access_sites().iter().map(|s| s.block).collect();
    classify_exact_blocks(g, assoc, policy, &blocks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Approx,
    Exact,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Approx => "approx",
            Method::Exact => "exact",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PipelineReport {
    pub sites: BTreeMap<SiteId, (Classification, Method)>,
    /// Focus blocks that needed the exact analysis.
    pub exact_blocks: BTreeSet<BlockId>,
}

/// Must/may first; only blocks with sites it leaves open get the exact
/// analysis.
pub fn classify_pipeline(g: &Cfg, assoc: usize, policy: InitialCachePolicy) -> PipelineReport {
    let mut report = prefilter(g, assoc, policy);
    resolve_open_sites(g, assoc, policy, &mut report);
    report
}

/// The must/may step alone: decided sites, and the blocks still open.
pub fn prefilter(g: &Cfg, assoc: usize, policy: InitialCachePolicy) -> PipelineReport {
    let bounds = analyze_approx(g, assoc, policy);
    let mut report = PipelineReport::default();
    for s in g.access_sites() {
        match classify_approx(bounds[s.src.0].as_ref(), s.block) {
            ApproxClass::AlwaysHit => {
                report.sites.insert(s.site, (Classification::AlwaysHit, Method::Approx));
            }
            ApproxClass::AlwaysMiss => {
                report.sites.insert(s.site, (Classification::AlwaysMiss, Method::Approx));
            }
            ApproxClass::Unknown => {
                report.exact_blocks.insert(s.block);
            }
        }
    }
    report
}

/// Runs the exact analysis for the blocks `prefilter` left open.
pub fn resolve_open_sites(g: &Cfg, assoc: usize, policy: InitialCachePolicy, report: &mut PipelineReport) {
    let exact = classify_exact_blocks(g, assoc, policy, &report.exact_blocks);
    for (site, c) in exact {
        report.sites.entry(site).or_insert((c, Method::Exact));
    }
}
