//! Program representation: toy-language AST, access graphs and the labeled
//! control-flow graph every analysis consumes.

mod access_graph;
mod ast;
mod cfg;
mod parser;

use std::fmt;

pub use access_graph::{parse_access_graph, render_access_graph};
pub use ast::{Cond, Decl, Expr, Program, RelOp, Stmt, StmtKind};
pub use cfg::{build_cfg, AccessSite, AssertSite, BlockId, Cfg, CfgBuilder, Edge, Label, LocId, LocInfo, LocKind, SiteId};
pub use parser::parse_program;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}
