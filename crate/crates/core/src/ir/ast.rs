//! Abstract syntax of the toy imperative language.

use std::fmt;

use serde::Serialize;

/// Integer expression. `Nondet` is the `*` choice marker.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Expr {
    Const(i64),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Nondet,
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }

    pub fn add(l: Expr, r: Expr) -> Self {
        Expr::Add(Box::new(l), Box::new(r))
    }

    pub fn sub(l: Expr, r: Expr) -> Self {
        Expr::Sub(Box::new(l), Box::new(r))
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Add(l, r) | Expr::Sub(l, r) => l.is_deterministic() && r.is_deterministic(),
            Expr::Nondet => false,
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        match self {
            Expr::Var(v) => v == var,
            Expr::Add(l, r) | Expr::Sub(l, r) => l.mentions(var) || r.mentions(var),
            Expr::Const(_) | Expr::Nondet => false,
        }
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<&str> {
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
            match e {
                Expr::Var(v) => {
                    if !out.contains(&v.as_str()) {
                        out.push(v);
                    }
                }
                Expr::Add(l, r) | Expr::Sub(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                Expr::Const(_) | Expr::Nondet => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Nondet => write!(f, "*"),
            Expr::Add(l, r) | Expr::Sub(l, r) => {
                let op = if matches!(self, Expr::Add(..)) { '+' } else { '-' };
                write!(f, "{l} {op} ")?;
                match **r {
                    Expr::Add(..) | Expr::Sub(..) => write!(f, "({r})"),
                    Expr::Const(c) if c < 0 => write!(f, "({r})"),
                    _ => write!(f, "{r}"),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RelOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl RelOp {
    /// Complementary relation over the integers.
    pub fn negate(self) -> Self {
        match self {
            RelOp::Lt => RelOp::Ge,
            RelOp::Le => RelOp::Gt,
            RelOp::Eq => RelOp::Ne,
            RelOp::Ne => RelOp::Eq,
            RelOp::Ge => RelOp::Lt,
            RelOp::Gt => RelOp::Le,
        }
    }

    /// The relation with its operands swapped: `a op b` iff `b op.flip() a`.
    pub fn flip(self) -> Self {
        match self {
            RelOp::Lt => RelOp::Gt,
            RelOp::Le => RelOp::Ge,
            RelOp::Ge => RelOp::Le,
            RelOp::Gt => RelOp::Lt,
            op => op,
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
            RelOp::Ge => a >= b,
            RelOp::Gt => a > b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
            RelOp::Ge => ">=",
            RelOp::Gt => ">",
        }
    }
}

/// Branch, loop and assertion condition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Cond {
    Cmp(Expr, RelOp, Expr),
    Bool(bool),
    Nondet,
}

impl Cond {
    /// Negation of `*` is `*`; comparisons take the complementary relation.
    pub fn negate(&self) -> Cond {
        match self {
            Cond::Cmp(l, op, r) => Cond::Cmp(l.clone(), op.negate(), r.clone()),
            Cond::Bool(b) => Cond::Bool(!b),
            Cond::Nondet => Cond::Nondet,
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Cmp(l, op, r) => write!(f, "{l} {} {r}", op.symbol()),
            Cond::Bool(b) => write!(f, "{b}"),
            Cond::Nondet => write!(f, "*"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Decl {
    pub name: String,
    pub init: Option<Expr>,
    pub line: u32,
}

#[derive(Clone, Debug, Serialize)]
pub enum StmtKind {
    Assign(String, Expr),
    If(Cond, Vec<Stmt>, Vec<Stmt>),
    While(Cond, Vec<Stmt>),
    Assert(Cond),
    Access(String),
}

/// A statement with its source line. Equality ignores the line.
#[derive(Clone, Debug, Serialize)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: u32,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        use StmtKind::*;
        match (&self.kind, &other.kind) {
            (Assign(a, e), Assign(b, f)) => a == b && e == f,
            (If(c, t, e), If(d, u, f)) => c == d && t == u && e == f,
            (While(c, b), While(d, e)) => c == d && b == e,
            (Assert(c), Assert(d)) => c == d,
            (Access(a), Access(b)) => a == b,
            _ => false,
        }
    }
}

impl PartialEq for Decl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.init == other.init
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn var_names(&self) -> Vec<String> {
        self.decls.iter().map(|d| d.name.clone()).collect()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            match &d.init {
                Some(e) => writeln!(f, "int {} = {e};", d.name)?,
                None => writeln!(f, "int {};", d.name)?,
            }
        }
        write_block(f, &self.body, 0)
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, stmts: &[Stmt], depth: usize) -> fmt::Result {
    let pad = "  ".repeat(depth);
    for s in stmts {
        match &s.kind {
            StmtKind::Assign(v, e) => writeln!(f, "{pad}{v} = {e};")?,
            StmtKind::Assert(c) => writeln!(f, "{pad}assert ({c});")?,
            StmtKind::Access(b) => writeln!(f, "{pad}access({b});")?,
            StmtKind::If(c, t, e) => {
                writeln!(f, "{pad}if ({c}) {{")?;
                write_block(f, t, depth + 1)?;
                if e.is_empty() {
                    writeln!(f, "{pad}}}")?;
                } else {
                    writeln!(f, "{pad}}} else {{")?;
                    write_block(f, e, depth + 1)?;
                    writeln!(f, "{pad}}}")?;
                }
            }
            StmtKind::While(c, b) => {
                writeln!(f, "{pad}while ({c}) {{")?;
                write_block(f, b, depth + 1)?;
                writeln!(f, "{pad}}}")?;
            }
        }
    }
    Ok(())
}
