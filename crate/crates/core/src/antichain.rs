//! Families of pairwise ⊆-incomparable block sets.
//!
//! A `KeepMax` antichain stands for the downward closure of its elements and
//! keeps only maximal sets; `KeepMin` dually keeps minimal sets. Elements are
//! kept sorted so structurally equal antichains compare equal.

use std::fmt;

use smallvec::SmallVec;

use crate::ir::BlockId;

/// A finite set of interned blocks, stored as a bitset.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockSet {
    // Trailing zero words are trimmed so equal sets have equal representations.
    words: SmallVec<[u64; 1]>,
}

impl BlockSet {
    pub fn new() -> Self {
        BlockSet::default()
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, b: BlockId) -> bool {
        let (w, bit) = (b.0 / 64, b.0 % 64);
        self.words.get(w).is_some_and(|x| x & (1 << bit) != 0)
    }

    pub fn insert(&mut self, b: BlockId) {
        let (w, bit) = (b.0 / 64, b.0 % 64);
        if self.words.len() <= w {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << bit;
    }

    pub fn with(&self, b: BlockId) -> BlockSet {
        let mut s = self.clone();
        s.insert(b);
        s
    }

    pub fn is_subset(&self, o: &BlockSet) -> bool {
        self.words.len() <= o.words.len() && self.words.iter().zip(&o.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = BlockId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter(move |bit| w & (1u64 << bit) != 0).map(move |bit| BlockId(wi * 64 + bit))
        })
    }
}

impl FromIterator<BlockId> for BlockSet {
    fn from_iter<I: IntoIterator<Item = BlockId>>(iter: I) -> Self {
        let mut s = BlockSet::new();
        for b in iter {
            s.insert(b);
        }
        s
    }
}

impl fmt::Debug for BlockSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|b| b.0)).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Orientation {
    KeepMin,
    KeepMax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("antichain orientation mismatch: {left:?} vs {right:?}")]
pub struct OrientationMismatch {
    pub left: Orientation,
    pub right: Orientation,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Antichain {
    orientation: Orientation,
    elements: Vec<BlockSet>,
}

impl Antichain {
    pub fn empty(orientation: Orientation) -> Self {
        Antichain { orientation, elements: Vec::new() }
    }

    pub fn from_sets(orientation: Orientation, sets: impl IntoIterator<Item = BlockSet>) -> Self {
        let mut a = Antichain::empty(orientation);
        for s in sets {
            a.insert_mut(s);
        }
        a
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn elements(&self) -> &[BlockSet] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// True if `kept` makes `other` redundant under this orientation.
    fn dominates(&self, kept: &BlockSet, other: &BlockSet) -> bool {
        match self.orientation {
            Orientation::KeepMax => other.is_subset(kept),
            Orientation::KeepMin => kept.is_subset(other),
        }
    }

    pub fn covers(&self, s: &BlockSet) -> bool {
        self.elements.iter().any(|k| self.dominates(k, s))
    }

    pub fn insert_mut(&mut self, s: BlockSet) -> bool {
        if self.covers(&s) {
            return false;
        }
        let orientation = self.orientation;
        self.elements.retain(|k| match orientation {
            Orientation::KeepMax => !k.is_subset(&s),
            Orientation::KeepMin => !s.is_subset(k),
        });
        let pos = self.elements.binary_search(&s).unwrap_err();
        self.elements.insert(pos, s);
        true
    }

    pub fn insert(&self, s: BlockSet) -> Antichain {
        let mut a = self.clone();
        a.insert_mut(s);
        a
    }

    pub fn union(&self, other: &Antichain) -> Result<Antichain, OrientationMismatch> {
        self.check(other)?;
        let mut a = self.clone();
        for s in &other.elements {
            a.insert_mut(s.clone());
        }
        Ok(a)
    }

    /// `union(self, other) == self`.
    pub fn subsumes(&self, other: &Antichain) -> Result<bool, OrientationMismatch> {
        self.check(other)?;
        Ok(other.elements.iter().all(|s| self.covers(s)))
    }

    fn check(&self, other: &Antichain) -> Result<(), OrientationMismatch> {
        if self.orientation == other.orientation {
            Ok(())
        } else {
            Err(OrientationMismatch { left: self.orientation, right: other.orientation })
        }
    }

    /// Applies `f` to every element, dropping `None`s, and re-normalizes.
    pub fn filter_map(&self, mut f: impl FnMut(&BlockSet) -> Option<BlockSet>) -> Antichain {
        let mut out = Antichain::empty(self.orientation);
        for s in &self.elements {
            if let Some(t) = f(s) {
                out.insert_mut(t);
            }
        }
        out
    }
}

impl fmt::Debug for Antichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.orientation)?;
        f.debug_set().entries(&self.elements).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn set(bs: &[usize]) -> BlockSet {
        bs.iter().map(|&b| BlockId(b)).collect()
    }

    const B: usize = 1;
    const C: usize = 2;
    const D: usize = 3;

    #[test]
    fn insert_examples() {
        let a = Antichain::from_sets(Orientation::KeepMax, [set(&[B]), set(&[B, C])]);
        assert_eq!(a.insert(set(&[B, C, D])).elements(), [set(&[B, C, D])]);
        let a = Antichain::from_sets(Orientation::KeepMin, [set(&[B, C]), set(&[B, C, D])]);
        assert_eq!(a.insert(set(&[B])).elements(), [set(&[B])]);
        let a = Antichain::from_sets(Orientation::KeepMax, [set(&[B, C, D])]);
        assert_eq!(a.insert(set(&[B, C, D])), a);
    }

    #[test]
    fn union_examples() {
        let mx = |s: &[&[usize]]| Antichain::from_sets(Orientation::KeepMax, s.iter().map(|x| set(x)));
        let mn = |s: &[&[usize]]| Antichain::from_sets(Orientation::KeepMin, s.iter().map(|x| set(x)));
        assert_eq!(mx(&[&[B]]).union(&mx(&[&[B, C]])).unwrap(), mx(&[&[B, C]]));
        assert_eq!(mn(&[&[B]]).union(&mn(&[&[C]])).unwrap().len(), 2);
        let a = mx(&[&[B], &[C, D]]);
        assert_eq!(a.union(&Antichain::empty(Orientation::KeepMax)).unwrap(), a);
        assert!(mx(&[]).union(&mn(&[])).is_err());
    }

    #[test]
    fn subsumes_examples() {
        let big = Antichain::from_sets(Orientation::KeepMax, [set(&[B, C, D])]);
        let small = Antichain::from_sets(Orientation::KeepMax, [set(&[B]), set(&[B, C])]);
        assert!(big.subsumes(&small).unwrap());
        assert!(small.subsumes(&Antichain::empty(Orientation::KeepMax)).unwrap());
        let b = Antichain::from_sets(Orientation::KeepMin, [set(&[B])]);
        let c = Antichain::from_sets(Orientation::KeepMin, [set(&[C])]);
        assert!(!b.subsumes(&c).unwrap());
        assert!(b.subsumes(&Antichain::empty(Orientation::KeepMax)).is_err());
    }

    #[test]
    fn blockset_beyond_one_word() {
        let s = set(&[3, 70, 130]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(BlockId(70)) && !s.contains(BlockId(71)));
        assert!(set(&[70]).is_subset(&s));
        assert!(!s.is_subset(&set(&[3, 70])));
        assert_eq!(s.iter().map(|b| b.0).collect::<Vec<_>>(), [3, 70, 130]);
    }

    fn arb_set() -> impl Strategy<Value = BlockSet> {
        (0u32..32).prop_map(|bits| (0..5).filter(|i| bits & (1 << i) != 0).map(BlockId).collect())
    }

    fn arb_orientation() -> impl Strategy<Value = Orientation> {
        prop_oneof![Just(Orientation::KeepMin), Just(Orientation::KeepMax)]
    }

    fn pairwise_incomparable(a: &Antichain) -> bool {
        let e = a.elements();
        (0..e.len()).all(|i| (0..e.len()).all(|j| i == j || !e[i].is_subset(&e[j])))
    }

    /// Naive oracle: the extremal elements of the whole accumulated family.
    fn extremal(o: Orientation, family: &BTreeSet<BlockSet>) -> Vec<BlockSet> {
        family
            .iter()
            .filter(|s| {
                !family.iter().any(|t| {
                    t != *s
                        && match o {
                            Orientation::KeepMax => s.is_subset(t),
                            Orientation::KeepMin => t.is_subset(s),
                        }
                })
            })
            .cloned()
            .collect()
    }

    proptest! {
        #[test]
        fn insert_matches_naive_extremal(o in arb_orientation(), sets in proptest::collection::vec(arb_set(), 0..20)) {
            let mut a = Antichain::empty(o);
            let mut family = BTreeSet::new();
            for s in sets {
                a.insert_mut(s.clone());
                family.insert(s.clone());
                prop_assert!(pairwise_incomparable(&a));
                let again = a.insert(s);
                prop_assert_eq!(&again, &a);
            }
            prop_assert_eq!(a.elements().to_vec(), extremal(o, &family));
        }

        #[test]
        fn union_is_least_upper_bound(
            o in arb_orientation(),
            xs in proptest::collection::vec(arb_set(), 0..6),
            ys in proptest::collection::vec(arb_set(), 0..6),
            zs in proptest::collection::vec(arb_set(), 0..6),
        ) {
            let (a, b, c) = (Antichain::from_sets(o, xs), Antichain::from_sets(o, ys), Antichain::from_sets(o, zs));
            let u = a.union(&b).unwrap();
            prop_assert!(pairwise_incomparable(&u));
            prop_assert!(u.subsumes(&a).unwrap() && u.subsumes(&b).unwrap());
            if c.subsumes(&a).unwrap() && c.subsumes(&b).unwrap() {
                prop_assert!(c.subsumes(&u).unwrap());
            }
            prop_assert_eq!(&u, &b.union(&a).unwrap());
            prop_assert_eq!(&u.union(&c).unwrap(), &a.union(&b.union(&c).unwrap()).unwrap());
            prop_assert_eq!(&u.union(&u).unwrap(), &u);
            prop_assert_eq!(a.subsumes(&b).unwrap(), a.union(&b).unwrap() == a);
        }
    }
}
