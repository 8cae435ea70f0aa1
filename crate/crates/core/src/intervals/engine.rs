//! Chaotic iteration over a CFG with widening at back-edge targets, followed by
//! simultaneous decreasing passes.

use std::collections::BTreeSet;

use crate::ir::{Cfg, Edge, LocId};

/// Lattice operations the engine needs.
pub trait Lattice: Clone + PartialEq {
    fn bottom() -> Self;
    fn join(&self, other: &Self) -> Self;
    /// `old.widen(new)` with `new` already joined with `old`.
    fn widen(&self, new: &Self) -> Self;
    fn meet(&self, other: &Self) -> Self;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterationOptions {
    /// Plain joins at a widening point before widening kicks in.
    pub widen_delay: usize,
    /// Decreasing re-evaluations after the widened fixpoint.
    pub narrow_passes: usize,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions { widen_delay: 0, narrow_passes: 1 }
    }
}

fn incoming<S: Lattice>(g: &Cfg, l: LocId, init: &S, state: &[S], transfer: &impl Fn(&Edge, &S) -> S) -> S {
    let mut acc = if l == g.entry() { init.clone() } else { S::bottom() };
    for e in g.in_edges(l) {
        acc = acc.join(&transfer(e, &state[e.src.0]));
    }
    acc
}

pub fn fixpoint<S: Lattice>(g: &Cfg, init: S, opts: IterationOptions, transfer: impl Fn(&Edge, &S) -> S) -> Vec<S> {
    let n = g.num_locations();
    let order = g.iteration_order();
    let mut rank = vec![0; n];
    for (i, l) in order.iter().enumerate() {
        rank[l.0] = i;
    }
    let widen_at = g.widening_points();
    let mut visits = vec![0usize; n];
    let mut state = vec![S::bottom(); n];
    let mut work: BTreeSet<(usize, usize)> = order.iter().map(|l| (rank[l.0], l.0)).collect();

    while let Some((_, li)) = work.pop_first() {
        let l = LocId(li);
        let new = incoming(g, l, &init, &state, &transfer);
        let old = &state[li];
        let next = if widen_at[li] && visits[li] >= opts.widen_delay {
            old.widen(&old.join(&new))
        } else {
            old.join(&new)
        };
        visits[li] += 1;
        if next != *old {
            state[li] = next;
            for e in g.out_edges(l) {
                work.insert((rank[e.dst.0], e.dst.0));
            }
        }
    }

    for _ in 0..opts.narrow_passes {
        let next: Vec<S> = (0..n)
            .map(|li| incoming(g, LocId(li), &init, &state, &transfer).meet(&state[li]))
            .collect();
        if next == state {
            break;
        }
        state = next;
    }
    state
}
