//! Ground-truth LRU semantics and the explicit-state collecting oracle.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::{other_block, CacheError, Classification, InitialCachePolicy};
use crate::ir::{BlockId, Cfg, Label, SiteId};

pub const DEFAULT_STATE_BUDGET: usize = 1_000_000;

/// Content of one cache set, youngest block first.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CacheSetState {
    blocks: Vec<BlockId>,
}

impl CacheSetState {
    pub fn empty() -> Self {
        CacheSetState::default()
    }

    /// Panics on duplicate blocks.
    pub fn from_blocks(blocks: Vec<BlockId>) -> Self {
        let distinct: BTreeSet<_> = blocks.iter().collect();
        assert_eq!(distinct.len(), blocks.len(), "duplicate block in cache set");
        CacheSetState { blocks }
    }

    pub fn blocks(&self) -> &[BlockId] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_hit(&self, b: BlockId) -> bool {
        self.blocks.contains(&b)
    }

    pub fn age(&self, b: BlockId) -> Option<usize> {
        self.blocks.iter().position(|&x| x == b)
    }

    /// Blocks younger than `b`, if `b` is cached.
    pub fn younger_than(&self, b: BlockId) -> Option<&[BlockId]> {
        self.age(b).map(|a| &self.blocks[..a])
    }

    pub fn access(&self, b: BlockId, assoc: usize) -> CacheSetState {
        let mut blocks = Vec::with_capacity(assoc);
        blocks.push(b);
        blocks.extend(self.blocks.iter().copied().filter(|&x| x != b));
        blocks.truncate(assoc);
        CacheSetState { blocks }
    }
}

impl fmt::Display for CacheSetState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", b.0)?;
        }
        f.write_str("]")
    }
}

/// Initial states for `policy`: the empty set, or every sequence of at most
/// `assoc` distinct blocks drawn from the graph's blocks and the foreign one.
pub fn initial_states(g: &Cfg, assoc: usize, policy: InitialCachePolicy) -> Vec<CacheSetState> {
    match policy {
        InitialCachePolicy::Empty => vec![CacheSetState::empty()],
        InitialCachePolicy::Unknown => {
            let universe: Vec<BlockId> = (0..=other_block(g).0).map(BlockId).collect();
            let mut out = vec![CacheSetState::empty()];
            let mut frontier = vec![Vec::new()];
            for _ in 0..assoc {
                let mut next = Vec::new();
                for seq in &frontier {
                    for &b in &universe {
                        if !seq.contains(&b) {
                            let mut s: Vec<BlockId> = seq.clone();
                            s.push(b);
                            out.push(CacheSetState { blocks: s.clone() });
                            next.push(s);
                        }
                    }
                }
                frontier = next;
            }
            out
        }
    }
}

pub fn collect_states(
    g: &Cfg,
    assoc: usize,
    policy: InitialCachePolicy,
    budget: usize,
) -> Result<Vec<BTreeSet<CacheSetState>>, CacheError> {
    if assoc == 0 {
        return Err(CacheError::ZeroAssociativity);
    }
    collect_states_from(g, assoc, initial_states(g, assoc, policy), budget)
}

/// Reachable cache states per location from the given entry states. The
/// budget caps the total number of (location, state) pairs.
pub fn collect_states_from(
    g: &Cfg,
    assoc: usize,
    seeds: impl IntoIterator<Item = CacheSetState>,
    budget: usize,
) -> Result<Vec<BTreeSet<CacheSetState>>, CacheError> {
    if assoc == 0 {
        return Err(CacheError::ZeroAssociativity);
    }
    let mut states = vec![BTreeSet::new(); g.num_locations()];
    let mut total = 0usize;
    let mut work = VecDeque::new();
    for s in seeds {
        if states[g.entry().0].insert(s.clone()) {
            total += 1;
            work.push_back((g.entry(), s));
        }
    }
    if total > budget {
        return Err(CacheError::BudgetExceeded(budget));
    }
    while let Some((l, s)) = work.pop_front() {
        for e in g.out_edges(l) {
            let t = match e.label {
                Label::Access { block, .. } => s.access(block, assoc),
                _ => s.clone(),
            };
            if states[e.dst.0].insert(t.clone()) {
                total += 1;
                if total > budget {
                    return Err(CacheError::BudgetExceeded(budget));
                }
                work.push_back((e.dst, t));
            }
        }
    }
    Ok(states)
}

pub fn classify_oracle(
    g: &Cfg,
    assoc: usize,
    policy: InitialCachePolicy,
    budget: usize,
) -> Result<BTreeMap<SiteId, Classification>, CacheError> {
    let states = collect_states(g, assoc, policy, budget)?;
    Ok(g
        .access_sites()
        .into_iter()
        .map(|site| {
            let at = &states[site.src.0];
            let hit = at.iter().any(|s| s.is_hit(site.block));
            let miss = at.iter().any(|s| !s.is_hit(site.block));
            (site.site, Classification::from_exists(hit, miss))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::fixtures::{flag_program, straight};
    use crate::ir::parse_access_graph;
    use proptest::prelude::*;

    fn st(s: &str) -> CacheSetState {
        CacheSetState::from_blocks(s.bytes().map(|c| BlockId((c - b'a') as usize)).collect())
    }

    fn blk(c: char) -> BlockId {
        BlockId((c as u8 - b'a') as usize)
    }

    #[test]
    fn lru_golden_sequence() {
        let s = st("abcd").access(blk('d'), 4);
        assert_eq!(s, st("dabc"));
        assert_eq!(s.access(blk('e'), 4), st("edab"));
        assert_eq!(st("abcd").access(blk('a'), 4), st("abcd"));
    }

    #[test]
    fn membership() {
        assert!(st("abcd").is_hit(blk('d')));
        assert!(!st("abcd").is_hit(blk('e')));
        assert!(!CacheSetState::empty().is_hit(blk('a')));
        assert_eq!(st("dabc").younger_than(blk('b')), Some(&st("da").blocks[..]));
    }

    #[test]
    fn straight_line_states() {
        let g = straight(&["a", "b", "a"]);
        let states = collect_states(&g, 2, InitialCachePolicy::Empty, DEFAULT_STATE_BUDGET).unwrap();
        let (a, b) = (g.block_id("a").unwrap(), g.block_id("b").unwrap());
        let seqs: Vec<Vec<CacheSetState>> = states.iter().map(|s| s.iter().cloned().collect()).collect();
        let s = |v: Vec<BlockId>| vec![CacheSetState::from_blocks(v)];
        assert_eq!(seqs, [s(vec![]), s(vec![a]), s(vec![b, a]), s(vec![a, b])]);
        let cls = classify_oracle(&g, 2, InitialCachePolicy::Empty, DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(cls.values().last(), Some(&Classification::AlwaysHit));
    }

    #[test]
    fn flag_program_states_and_classes() {
        let g = flag_program();
        let states = collect_states(&g, 4, InitialCachePolicy::Empty, DEFAULT_STATE_BUDGET).unwrap();
        let sites = g.access_sites();
        let second = sites.iter().find(|s| s.site.0 == 2).unwrap();
        let (a, b) = (g.block_id("a").unwrap(), g.block_id("b").unwrap());
        let expected: BTreeSet<_> = [vec![a], vec![b]].into_iter().map(CacheSetState::from_blocks).collect();
        assert_eq!(states[second.src.0], expected);
        let cls = classify_oracle(&g, 4, InitialCachePolicy::Empty, DEFAULT_STATE_BUDGET).unwrap();
        let got: Vec<_> = cls.values().copied().collect();
        use Classification::*;
        assert_eq!(got, [AlwaysMiss, AlwaysMiss, Variable, Variable]);
    }

    #[test]
    fn no_accesses_keep_initial_state() {
        let g = parse_access_graph("loc a\nloc b\nloc c\nedge a b\nedge b a\nedge a c").unwrap();
        let states = collect_states(&g, 2, InitialCachePolicy::Empty, 10).unwrap();
        for s in states {
            assert_eq!(s, BTreeSet::from([CacheSetState::empty()]));
        }
    }

    #[test]
    fn cut_off_site_is_unreachable() {
        let g = parse_access_graph("loc s\nloc t\nloc u\nedge t u access a").unwrap();
        let cls = classify_oracle(&g, 2, InitialCachePolicy::Empty, 10).unwrap();
        assert_eq!(cls.values().collect::<Vec<_>>(), [&Classification::Unreachable]);
    }

    #[test]
    fn budget_is_an_error() {
        let g = straight(&["a", "b", "c", "d"]);
        assert_eq!(
            collect_states(&g, 2, InitialCachePolicy::Unknown, 20),
            Err(CacheError::BudgetExceeded(20))
        );
        assert_eq!(collect_states(&g, 0, InitialCachePolicy::Empty, 20), Err(CacheError::ZeroAssociativity));
    }

    #[test]
    fn unknown_init_counts() {
        // Blocks a, b plus the foreign block: 1 + 3 + 6 sequences for N = 2.
        let g = straight(&["a", "b"]);
        assert_eq!(initial_states(&g, 2, InitialCachePolicy::Unknown).len(), 10);
        assert_eq!(initial_states(&g, 5, InitialCachePolicy::Unknown).len(), 1 + 3 + 6 + 6);
    }

    fn arb_state() -> impl Strategy<Value = (CacheSetState, usize)> {
        (1usize..5).prop_flat_map(|n| {
            (Just(n), proptest::sample::subsequence((0..6).collect::<Vec<usize>>(), 0..=n).prop_shuffle())
                .prop_map(|(n, v)| (CacheSetState::from_blocks(v.into_iter().map(BlockId).collect()), n))
        })
    }

    proptest! {
        #[test]
        fn access_laws((s, n) in arb_state(), b in 0usize..6) {
            let b = BlockId(b);
            let t = s.access(b, n);
            prop_assert_eq!(t.access(b, n), t.clone());
            prop_assert_eq!(t.len(), (s.len() + usize::from(!s.is_hit(b))).min(n));
            prop_assert_eq!(t.age(b), Some(0));
        }

        #[test]
        fn collect_is_monotone_in_seeds(
            seeds in proptest::collection::vec(arb_state(), 1..4),
            extra in proptest::collection::vec(arb_state(), 0..3),
        ) {
            let g = parse_access_graph(
                "loc p\nloc q\nloc r\nedge p q access a\nedge q p access b\nedge q r access c\nedge r p access a",
            ).unwrap();
            let fit = |v: &Vec<(CacheSetState, usize)>| -> Vec<CacheSetState> {
                v.iter().map(|(s, _)| CacheSetState::from_blocks(s.blocks().iter().copied().take(2).collect())).collect()
            };
            let small = collect_states_from(&g, 2, fit(&seeds), 10_000).unwrap();
            let big = collect_states_from(&g, 2, fit(&seeds).into_iter().chain(fit(&extra)), 10_000).unwrap();
            for (x, y) in small.iter().zip(&big) {
                prop_assert!(x.is_subset(y));
            }
        }
    }
}
