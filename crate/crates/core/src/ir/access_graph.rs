//! Direct access-graph input:
//!
//! ```text
//! loc <name>
//! entry <name>
//! edge <src> <dst> [access <block>]
//! ```
//!
//! Comments start with `#`. Without an `entry` line the first declared
//! location is the entry. If the entry has incoming edges, a fresh location
//! `^entry` with a `Nop` edge into it becomes the entry.

use std::collections::HashMap;

use super::cfg::{Cfg, CfgBuilder, Label, LocId, LocKind};
use super::ParseError;

struct RawEdge {
    src: String,
    dst: String,
    block: Option<String>,
    line: u32,
    col: u32,
}

pub fn parse_access_graph(text: &str) -> Result<Cfg, ParseError> {
    let mut locs: Vec<String> = Vec::new();
    let mut seen: HashMap<String, u32> = HashMap::new();
    let mut entry: Option<(String, u32)> = None;
    let mut edges = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i as u32 + 1;
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        let err = |message: String| ParseError { line, col: 1, message };
        match words.as_slice() {
            [] => {}
            ["loc", name] => {
                if let Some(prev) = seen.get(*name) {
                    return Err(err(format!("duplicate location `{name}` (first declared on line {prev})")));
                }
                seen.insert(name.to_string(), line);
                locs.push(name.to_string());
            }
            ["entry", name] => {
                if entry.is_some() {
                    return Err(err("entry declared twice".into()));
                }
                entry = Some((name.to_string(), line));
            }
            ["edge", src, dst] => edges.push(RawEdge { src: src.to_string(), dst: dst.to_string(), block: None, line, col: 1 }),
            ["edge", src, dst, "access", block] => edges.push(RawEdge {
                src: src.to_string(),
                dst: dst.to_string(),
                block: Some(block.to_string()),
                line,
                col: 1,
            }),
            [kw, ..] => {
                let msg = match *kw {
                    "loc" | "entry" => format!("`{kw}` takes exactly one name"),
                    "edge" => "expected `edge <src> <dst> [access <block>]`".to_string(),
                    _ => format!("unknown directive `{kw}`"),
                };
                return Err(err(msg));
            }
        }
    }

    let entry_name = match entry {
        Some((name, line)) => {
            if !seen.contains_key(&name) {
                return Err(ParseError { line, col: 1, message: format!("entry `{name}` is not a declared location") });
            }
            name
        }
        None => match locs.first() {
            Some(first) => first.clone(),
            None => return Err(ParseError { line: 1, col: 1, message: "graph declares no locations".into() }),
        },
    };
    for e in &edges {
        for end in [&e.src, &e.dst] {
            if !seen.contains_key(end) {
                return Err(ParseError { line: e.line, col: e.col, message: format!("edge refers to undeclared location `{end}`") });
            }
        }
    }

    let entry_has_incoming = edges.iter().any(|e| e.dst == entry_name);
    let mut b = if entry_has_incoming { CfgBuilder::new("^entry") } else { CfgBuilder::new(&entry_name) };
    let mut ids: HashMap<&str, LocId> = HashMap::new();
    if !entry_has_incoming {
        ids.insert(&entry_name, b.entry());
    }
    for name in &locs {
        if !ids.contains_key(name.as_str()) {
            let id = b.add_location(name.clone(), LocKind::Point, None);
            ids.insert(name, id);
        }
    }
    if entry_has_incoming {
        let target = ids[entry_name.as_str()];
        b.edge(b.entry(), Label::Nop, target);
    }
    for e in &edges {
        let (s, d) = (ids[e.src.as_str()], ids[e.dst.as_str()]);
        match &e.block {
            Some(block) => {
                b.access(s, block, d);
            }
            None => b.edge(s, Label::Nop, d),
        }
    }
    Ok(b.build())
}

/// Renders the control-flow model of `g` in the access-graph format. Labels
/// other than accesses become plain edges.
pub fn render_access_graph(g: &Cfg) -> String {
    let mut out = String::new();
    for l in g.locations() {
        out += &format!("loc {}\n", g.info(l).name);
    }
    out += &format!("entry {}\n", g.info(g.entry()).name);
    for e in g.edges() {
        let (s, d) = (&g.info(e.src).name, &g.info(e.dst).name);
        match e.label {
            Label::Access { block, .. } => out += &format!("edge {s} {d} access {}\n", g.block_name(block)),
            _ => out += &format!("edge {s} {d}\n"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_graph() {
        let g = parse_access_graph("loc L0\nloc L1\nentry L0\nedge L0 L1 access a\n").unwrap();
        assert_eq!(g.num_locations(), 2);
        assert_eq!(g.access_sites().len(), 1);
        assert!(g.is_access_only());
    }

    #[test]
    fn dangling_target() {
        let err = parse_access_graph("loc L0\nloc L1\nedge L0 L9 access a").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("`L9`"));
    }

    #[test]
    fn duplicate_location() {
        let err = parse_access_graph("loc A\nloc B\nloc A").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("duplicate"));
    }

    #[test]
    fn entry_with_incoming_edge_gets_fresh_entry() {
        let g = parse_access_graph("loc H\nentry H\nedge H H access a # self loop\n").unwrap();
        assert_eq!(g.info(g.entry()).name, "^entry");
        assert_eq!(g.in_edges(g.entry()).count(), 0);
        assert_eq!(g.num_locations(), 2);
    }
}
