//! Seeded generators for random test instances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bounds::{BoundExpr, BoundSystem, VarId};
use crate::intervals::Bound;
use crate::ir::{Cfg, CfgBuilder, Label, LocKind};

const BLOCK_NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// A random `Access`/`Nop` graph with 1 to `max_locs` locations and at most
/// `max_blocks` distinct blocks. Every location except the entry gets a
/// predecessor among the earlier ones, so all are reachable. Extra edges may
/// point anywhere but the entry, including backwards.
pub fn access_cfg<R: Rng + ?Sized>(rng: &mut R, max_locs: usize, max_blocks: usize) -> Cfg {
    assert!(max_locs >= 1 && (1..=BLOCK_NAMES.len()).contains(&max_blocks));
    let n = rng.gen_range(1..=max_locs);
    let nblocks = rng.gen_range(1..=max_blocks);
    let mut b = CfgBuilder::new("l0");
    let locs: Vec<_> = std::iter::once(b.entry())
        .chain((1..n).map(|i| b.add_location(format!("l{i}"), LocKind::Point, None)))
        .collect();
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    if n > 1 {
        for _ in 0..rng.gen_range(0..=n) {
            pairs.push((rng.gen_range(0..n), rng.gen_range(1..n)));
        }
    }
    pairs.shuffle(rng);
    for (s, d) in pairs {
        if rng.gen_bool(0.75) {
            let blk = BLOCK_NAMES[rng.gen_range(0..nblocks)];
            b.access(locs[s], blk, locs[d]);
        } else {
            b.edge(locs[s], Label::Nop, locs[d]);
        }
    }
    b.build()
}

/// A random bound system over `1..=max_vars` unknowns named `x0`, `x1`, ...
/// with small constants and offsets.
pub fn bound_system<R: Rng + ?Sized>(rng: &mut R, max_vars: usize, depth: usize) -> BoundSystem {
    let n = rng.gen_range(1..=max_vars);
    let mut sys = BoundSystem::new();
    let vars: Vec<VarId> = (0..n).map(|i| sys.declare(format!("x{i}"))).collect();
    for &v in &vars {
        let e = bound_expr(rng, &vars, depth);
        sys.define(v, e);
    }
    sys
}

fn bound_expr<R: Rng + ?Sized>(rng: &mut R, vars: &[VarId], depth: usize) -> BoundExpr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..10) {
            0 => BoundExpr::NEG_INF,
            1 => BoundExpr::POS_INF,
            2..=4 => BoundExpr::constant(rng.gen_range(-5..=5)),
            _ => BoundExpr::var(*vars.choose(rng).expect("at least one unknown")),
        };
    }
    let sub = |rng: &mut R| bound_expr(rng, vars, depth - 1);
    match rng.gen_range(0..4) {
        0 => sub(rng).add(rng.gen_range(-2..=2)),
        1 => BoundExpr::min(sub(rng), sub(rng)),
        2 => BoundExpr::max(sub(rng), sub(rng)),
        _ => {
            let threshold = if rng.gen_bool(0.2) { Bound::NegInf } else { Bound::Fin(rng.gen_range(-5..=5)) };
            BoundExpr::guard(sub(rng), threshold, sub(rng))
        }
    }
}

/// Source of a random program over the single variable `i` in the
/// bound-extractable fragment: constant and increment assignments, branches
/// and loops on comparisons with constants or `*`, and asserts.
pub fn fragment_program<R: Rng + ?Sized>(rng: &mut R, max_depth: usize) -> String {
    let mut out = if rng.gen_bool(0.5) {
        format!("int i = {};\n", rng.gen_range(-3..=5))
    } else {
        "int i;\n".to_string()
    };
    let stmts = rng.gen_range(1..=4);
    for _ in 0..stmts {
        fragment_stmt(rng, max_depth, 0, &mut out);
    }
    out
}

fn fragment_cond<R: Rng + ?Sized>(rng: &mut R) -> String {
    if rng.gen_bool(0.2) {
        return "*".into();
    }
    let op = ["<", "<=", ">", ">="].choose(rng).expect("nonempty");
    let c = rng.gen_range(-3..=12);
    if rng.gen_bool(0.8) {
        format!("i {op} {c}")
    } else {
        format!("{c} {op} i")
    }
}

fn fragment_stmt<R: Rng + ?Sized>(rng: &mut R, max_depth: usize, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let nested = depth < max_depth;
    match rng.gen_range(0..if nested { 7 } else { 3 }) {
        0 => *out += &format!("{pad}i = {};\n", rng.gen_range(-3..=10)),
        1 => *out += &format!("{pad}i = i + {};\n", rng.gen_range(-2..=3)),
        2 => {
            let op = ["<", "<=", ">", ">="].choose(rng).expect("nonempty");
            *out += &format!("{pad}assert (i {op} {});\n", rng.gen_range(-3..=12));
        }
        3 | 4 => {
            *out += &format!("{pad}if ({}) {{\n", fragment_cond(rng));
            for _ in 0..rng.gen_range(1..=3) {
                fragment_stmt(rng, max_depth, depth + 1, out);
            }
            if rng.gen_bool(0.5) {
                *out += &format!("{pad}}} else {{\n");
                for _ in 0..rng.gen_range(1..=2) {
                    fragment_stmt(rng, max_depth, depth + 1, out);
                }
            }
            *out += &format!("{pad}}}\n");
        }
        _ => {
            *out += &format!("{pad}while ({}) {{\n", fragment_cond(rng));
            for _ in 0..rng.gen_range(1..=3) {
                fragment_stmt(rng, max_depth, depth + 1, out);
            }
            *out += &format!("{pad}}}\n");
        }
    }
}

/// Program over `x`, `y`, `z` with copies, differences and relational guards.
/// The variables are declared without initializers.
pub fn linear_program<R: Rng + ?Sized>(rng: &mut R, max_depth: usize) -> String {
    let mut out = "int x, y, z;\n".to_string();
    for _ in 0..rng.gen_range(2..=6) {
        linear_stmt(rng, max_depth, 0, &mut out);
    }
    out
}

const LINEAR_VARS: [&str; 3] = ["x", "y", "z"];

fn linear_var<R: Rng + ?Sized>(rng: &mut R) -> &'static str {
    LINEAR_VARS.choose(rng).expect("nonempty")
}

fn linear_cond<R: Rng + ?Sized>(rng: &mut R) -> String {
    let op = ["<", "<=", ">", ">=", "=="].choose(rng).expect("nonempty");
    let c = rng.gen_range(-3..=6);
    match rng.gen_range(0..5) {
        0 => "*".into(),
        1 | 2 => format!("{} {op} {c}", linear_var(rng)),
        _ => format!("{} - {} {op} {c}", linear_var(rng), linear_var(rng)),
    }
}

fn linear_stmt<R: Rng + ?Sized>(rng: &mut R, max_depth: usize, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let nested = depth < max_depth;
    let v = linear_var(rng);
    match rng.gen_range(0..if nested { 8 } else { 5 }) {
        0 => *out += &format!("{pad}{v} = {};\n", rng.gen_range(-3..=6)),
        1 => *out += &format!("{pad}{v} = {} + {};\n", linear_var(rng), rng.gen_range(-2..=2)),
        2 => *out += &format!("{pad}{v} = {} - {};\n", linear_var(rng), linear_var(rng)),
        3 => *out += &format!("{pad}{v} = {} + {} - {};\n", linear_var(rng), linear_var(rng), linear_var(rng)),
        4 => *out += &format!("{pad}assert ({});\n", linear_cond(rng).replace('*', "x == x")),
        5 | 6 => {
            *out += &format!("{pad}if ({}) {{\n", linear_cond(rng));
            for _ in 0..rng.gen_range(1..=3) {
                linear_stmt(rng, max_depth, depth + 1, out);
            }
            *out += &format!("{pad}}} else {{\n");
            linear_stmt(rng, max_depth, depth + 1, out);
            *out += &format!("{pad}}}\n");
        }
        _ => {
            *out += &format!("{pad}while ({v} < {}) {{\n", rng.gen_range(0..=8));
            for _ in 0..rng.gen_range(0..=2) {
                linear_stmt(rng, max_depth, depth + 1, out);
            }
            *out += &format!("{pad}  {v} = {v} + 1;\n{pad}}}\n");
        }
    }
}
