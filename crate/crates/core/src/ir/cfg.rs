use std::fmt;

use serde::Serialize;

use super::ast::{Cond, Expr, Program, Stmt, StmtKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LocId(pub usize);

/// Identifies one access edge; unique within a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SiteId(pub usize);

/// Interned memory block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BlockId(pub usize);

impl fmt::Display for LocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Label {
    Assign(String, Expr),
    Assume(Cond),
    Access { block: BlockId, site: SiteId },
    Nop,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub src: LocId,
    pub label: Label,
    pub dst: LocId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LocKind {
    Entry,
    /// Program point after a statement or branch edge.
    Point,
    LoopHead,
    Join,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocInfo {
    pub name: String,
    pub kind: LocKind,
    /// Source line of the statement that created this location, if any.
    pub line: Option<u32>,
}

/// An `assert` statement; its check happens at `loc`, on the state before the
/// condition is assumed.
#[derive(Clone, Debug, Serialize)]
pub struct AssertSite {
    pub id: usize,
    pub loc: LocId,
    pub cond: Cond,
    pub line: Option<u32>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AccessSite {
    pub site: SiteId,
    pub block: BlockId,
    pub src: LocId,
    pub dst: LocId,
}

/// Labeled control-flow graph.
#[derive(Clone, Debug, Serialize)]
pub struct Cfg {
    locations: Vec<LocInfo>,
    edges: Vec<Edge>,
    entry: LocId,
    blocks: Vec<String>,
    vars: Vec<String>,
    asserts: Vec<AssertSite>,
    #[serde(skip)]
    out_edges: Vec<Vec<usize>>,
    #[serde(skip)]
    in_edges: Vec<Vec<usize>>,
}

impl Cfg {
    pub fn entry(&self) -> LocId {
        self.entry
    }

    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn locations(&self) -> impl Iterator<Item = LocId> {
        (0..self.locations.len()).map(LocId)
    }

    pub fn info(&self, l: LocId) -> &LocInfo {
        &self.locations[l.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, l: LocId) -> impl Iterator<Item = &Edge> {
        self.out_edges[l.0].iter().map(|&i| &self.edges[i])
    }

    pub fn in_edges(&self, l: LocId) -> impl Iterator<Item = &Edge> {
        self.in_edges[l.0].iter().map(|&i| &self.edges[i])
    }

    pub fn blocks(&self) -> &[String] {
        &self.blocks
    }

    pub fn block_name(&self, b: BlockId) -> &str {
        &self.blocks[b.0]
    }

    pub fn block_id(&self, name: &str) -> Option<BlockId> {
        self.blocks.iter().position(|b| b == name).map(BlockId)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn asserts(&self) -> &[AssertSite] {
        &self.asserts
    }

    pub fn loc_by_name(&self, name: &str) -> Option<LocId> {
        self.locations.iter().position(|l| l.name == name).map(LocId)
    }

    /// Access sites ordered by site id.
    pub fn access_sites(&self) -> Vec<AccessSite> {
        let mut out: Vec<AccessSite> = self
            .edges
            .iter()
            .filter_map(|e| match e.label {
                Label::Access { block, site } => Some(AccessSite { site, block, src: e.src, dst: e.dst }),
                _ => None,
            })
            .collect();
        out.sort_by_key(|s| s.site);
        out
    }

    pub fn loop_heads(&self) -> Vec<LocId> {
        self.locations().filter(|&l| self.info(l).kind == LocKind::LoopHead).collect()
    }

    /// True if the graph only carries `Access` and `Nop` labels.
    pub fn is_access_only(&self) -> bool {
        self.edges.iter().all(|e| matches!(e.label, Label::Access { .. } | Label::Nop))
    }

    /// Replaces every assignment and guard by `Nop`, keeping only control flow and
    /// memory accesses.
    pub fn erase_guards(&self) -> Cfg {
        let mut g = self.clone();
        for e in &mut g.edges {
            if matches!(e.label, Label::Assign(..) | Label::Assume(_)) {
                e.label = Label::Nop;
            }
        }
        g
    }

    /// Locations reachable from the entry along edges, ignoring labels.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_locations()];
        let mut stack = vec![self.entry];
        seen[self.entry.0] = true;
        while let Some(l) = stack.pop() {
            for e in self.out_edges(l) {
                if !seen[e.dst.0] {
                    seen[e.dst.0] = true;
                    stack.push(e.dst);
                }
            }
        }
        seen
    }

    /// Targets of back edges under a depth-first traversal from the entry that
    /// visits successors in edge order.
    pub fn widening_points(&self) -> Vec<bool> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let n = self.num_locations();
        let mut mark = vec![Mark::New; n];
        let mut heads = vec![false; n];
        // Iterative DFS: (location, next out-edge index).
        let mut stack = vec![(self.entry, 0usize)];
        mark[self.entry.0] = Mark::Active;
        while let Some(&mut (l, ref mut next)) = stack.last_mut() {
            if let Some(&ei) = self.out_edges[l.0].get(*next) {
                *next += 1;
                let d = self.edges[ei].dst;
                match mark[d.0] {
                    Mark::New => {
                        mark[d.0] = Mark::Active;
                        stack.push((d, 0));
                    }
                    Mark::Active => heads[d.0] = true,
                    Mark::Done => {}
                }
            } else {
                mark[l.0] = Mark::Done;
                stack.pop();
            }
        }
        heads
    }

    /// Reverse postorder of the DFS from the entry, followed by unreachable
    /// locations in index order.
    pub fn iteration_order(&self) -> Vec<LocId> {
        let n = self.num_locations();
        let mut seen = vec![false; n];
        let mut post = Vec::with_capacity(n);
        let mut stack = vec![(self.entry, 0usize)];
        seen[self.entry.0] = true;
        while let Some(&mut (l, ref mut next)) = stack.last_mut() {
            if let Some(&ei) = self.out_edges[l.0].get(*next) {
                *next += 1;
                let d = self.edges[ei].dst;
                if !seen[d.0] {
                    seen[d.0] = true;
                    stack.push((d, 0));
                }
            } else {
                post.push(l);
                stack.pop();
            }
        }
        post.reverse();
        post.extend((0..n).filter(|&i| !seen[i]).map(LocId));
        post
    }
}

/// Incremental construction of a [`Cfg`].
#[derive(Debug)]
pub struct CfgBuilder {
    locations: Vec<LocInfo>,
    edges: Vec<Edge>,
    blocks: Vec<String>,
    vars: Vec<String>,
    asserts: Vec<AssertSite>,
    next_site: usize,
}

impl CfgBuilder {
    /// Starts a graph whose entry is a fresh location named `entry_name`.
    pub fn new(entry_name: &str) -> Self {
        CfgBuilder {
            locations: vec![LocInfo { name: entry_name.to_string(), kind: LocKind::Entry, line: None }],
            edges: Vec::new(),
            blocks: Vec::new(),
            vars: Vec::new(),
            asserts: Vec::new(),
            next_site: 0,
        }
    }

    pub fn entry(&self) -> LocId {
        LocId(0)
    }

    pub fn add_location(&mut self, name: impl Into<String>, kind: LocKind, line: Option<u32>) -> LocId {
        self.locations.push(LocInfo { name: name.into(), kind, line });
        LocId(self.locations.len() - 1)
    }

    /// Adds an unnamed location; it is named `L<index>`.
    pub fn fresh(&mut self, kind: LocKind, line: Option<u32>) -> LocId {
        let id = self.locations.len();
        self.add_location(format!("L{id}"), kind, line)
    }

    pub fn intern_block(&mut self, name: &str) -> BlockId {
        match self.blocks.iter().position(|b| b == name) {
            Some(i) => BlockId(i),
            None => {
                self.blocks.push(name.to_string());
                BlockId(self.blocks.len() - 1)
            }
        }
    }

    pub fn declare_var(&mut self, name: &str) {
        if !self.vars.iter().any(|v| v == name) {
            self.vars.push(name.to_string());
        }
    }

    pub fn edge(&mut self, src: LocId, label: Label, dst: LocId) {
        self.edges.push(Edge { src, label, dst });
    }

    /// Adds an access edge with the next free site id.
    pub fn access(&mut self, src: LocId, block: &str, dst: LocId) -> SiteId {
        let block = self.intern_block(block);
        let site = SiteId(self.next_site);
        self.next_site += 1;
        self.edge(src, Label::Access { block, site }, dst);
        site
    }

    pub fn add_assert(&mut self, loc: LocId, cond: Cond, line: Option<u32>) {
        let id = self.asserts.len();
        self.asserts.push(AssertSite { id, loc, cond, line });
    }

    pub fn has_incoming(&self, l: LocId) -> bool {
        self.edges.iter().any(|e| e.dst == l)
    }

    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn build(self) -> Cfg {
        let n = self.locations.len();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (i, e) in self.edges.iter().enumerate() {
            out_edges[e.src.0].push(i);
            in_edges[e.dst.0].push(i);
        }
        debug_assert!(in_edges[0].is_empty(), "entry must not have incoming edges");
        Cfg {
            locations: self.locations,
            edges: self.edges,
            entry: LocId(0),
            blocks: self.blocks,
            vars: self.vars,
            asserts: self.asserts,
            out_edges,
            in_edges,
        }
    }
}

/// Structured translation of a program: one location per program point.
///
/// `if` and `while` produce an `Assume` edge for the condition and one for its
/// negation (two `Nop` edges for `*`); branches meet at a fresh join location.
/// Declarations with an initializer become assignments.
pub fn build_cfg(p: &Program) -> Cfg {
    let mut b = CfgBuilder::new("L0");
    for d in &p.decls {
        b.declare_var(&d.name);
    }
    let mut cur = b.entry();
    for d in &p.decls {
        if let Some(e) = &d.init {
            let next = b.fresh(LocKind::Point, Some(d.line));
            b.edge(cur, Label::Assign(d.name.clone(), e.clone()), next);
            cur = next;
        }
    }
    translate_block(&mut b, &p.body, cur);
    b.build()
}

fn branch_edges(b: &mut CfgBuilder, src: LocId, cond: &Cond, t: LocId, f: LocId) {
    match cond {
        Cond::Nondet => {
            b.edge(src, Label::Nop, t);
            b.edge(src, Label::Nop, f);
        }
        c => {
            b.edge(src, Label::Assume(c.clone()), t);
            b.edge(src, Label::Assume(c.negate()), f);
        }
    }
}

fn translate_block(b: &mut CfgBuilder, stmts: &[Stmt], mut cur: LocId) -> LocId {
    for s in stmts {
        cur = translate_stmt(b, s, cur);
    }
    cur
}

fn translate_stmt(b: &mut CfgBuilder, s: &Stmt, cur: LocId) -> LocId {
    let line = Some(s.line);
    match &s.kind {
        StmtKind::Assign(v, e) => {
            let next = b.fresh(LocKind::Point, line);
            b.edge(cur, Label::Assign(v.clone(), e.clone()), next);
            next
        }
        StmtKind::Access(block) => {
            let next = b.fresh(LocKind::Point, line);
            b.access(cur, block, next);
            next
        }
        StmtKind::Assert(c) => {
            let next = b.fresh(LocKind::Point, line);
            b.add_assert(cur, c.clone(), line);
            b.edge(cur, Label::Assume(c.clone()), next);
            next
        }
        StmtKind::If(c, then_b, else_b) => {
            let t = b.fresh(LocKind::Point, line);
            let f = b.fresh(LocKind::Point, line);
            branch_edges(b, cur, c, t, f);
            let t_end = translate_block(b, then_b, t);
            let f_end = translate_block(b, else_b, f);
            let join = b.fresh(LocKind::Join, line);
            b.edge(t_end, Label::Nop, join);
            b.edge(f_end, Label::Nop, join);
            join
        }
        StmtKind::While(c, body) => {
            let head = b.fresh(LocKind::LoopHead, line);
            b.edge(cur, Label::Nop, head);
            let body_start = b.fresh(LocKind::Point, line);
            let exit = b.fresh(LocKind::Point, line);
            branch_edges(b, head, c, body_start, exit);
            let body_end = translate_block(b, body, body_start);
            b.edge(body_end, Label::Nop, head);
            exit
        }
    }
}
