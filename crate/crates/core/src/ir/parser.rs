//! Lexer and recursive-descent parser for the toy language.
//!
//! ```text
//! program := decl* stmt*
//! decl    := "int" ident ("=" expr)? ("," ident ("=" expr)?)* ";"
//! stmt    := ident "=" expr ";"
//!          | "if" "(" cond ")" block ("else" block)?
//!          | "while" "(" cond ")" block
//!          | "assert" "(" cond ")" ";"
//!          | "access" "(" ident ")" ";"
//! block   := "{" stmt* "}" | stmt
//! cond    := expr relop expr | "*" | "true" | "false"
//! expr    := term (("+" | "-") term)*
//! term    := integer | ident | "*" | "-" term | "(" expr ")"
//! ```
//!
//! Comments run from `#` or `//` to the end of the line.

use std::collections::HashSet;

use super::ast::{Cond, Decl, Expr, Program, RelOp, Stmt, StmtKind};
use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Punct(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

const PUNCTS: [&str; 16] = [
    "<=", ">=", "==", "!=", "<", ">", "=", "+", "-", "*", "(", ")", "{", "}", ";", ",",
];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno as u32 + 1;
        let bytes = line.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let col = i as u32 + 1;
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            if c == b'#' || line[i..].starts_with("//") {
                break;
            }
            if c.is_ascii_alphabetic() || c == b'_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(line[start..i].to_string()), line: line_no, col });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = line[start..i].parse::<i64>().map_err(|_| ParseError {
                    line: line_no,
                    col,
                    message: "integer literal out of range".to_string(),
                })?;
                out.push(Token { tok: Tok::Int(n), line: line_no, col });
                continue;
            }
            match PUNCTS.iter().find(|p| line[i..].starts_with(**p)) {
                Some(p) => {
                    out.push(Token { tok: Tok::Punct(p), line: line_no, col });
                    i += p.len();
                }
                None => {
                    return Err(ParseError {
                        line: line_no,
                        col,
                        message: format!("unexpected character `{}`", line[i..].chars().next().unwrap()),
                    })
                }
            }
        }
    }
    let (line, col) = out.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1));
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: [&str; 8] = ["int", "if", "else", "while", "assert", "access", "true", "false"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    declared: HashSet<String>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.line,
            col: t.col,
            message: format!("expected {expected}, found {}", t.tok.describe()),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.is_punct(p) {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(&format!("`{p}`")))
        }
    }

    fn ident(&mut self) -> Result<(String, u32, u32), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let t = self.bump();
                Ok((s_of(&t.tok), t.line, t.col))
            }
            _ => Err(self.error_here("identifier")),
        }
    }

    fn use_var(&mut self) -> Result<String, ParseError> {
        let (name, line, col) = self.ident()?;
        if !self.declared.contains(&name) {
            return Err(ParseError { line, col, message: format!("use of undeclared variable `{name}`") });
        }
        Ok(name)
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut decls = Vec::new();
        while self.is_keyword("int") {
            let line = self.bump().line;
            loop {
                let (name, l, c) = self.ident()?;
                if self.declared.contains(&name) {
                    return Err(ParseError { line: l, col: c, message: format!("variable `{name}` declared twice") });
                }
                self.declared.insert(name.clone());
                let init = if self.is_punct("=") {
                    self.bump();
                    Some(self.expr()?)
                } else {
                    None
                };
                decls.push(Decl { name, init, line });
                if self.is_punct(",") {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect_punct(";")?;
        }
        let mut body = Vec::new();
        while self.peek().tok != Tok::Eof {
            body.push(self.stmt()?);
        }
        Ok(Program { decls, body })
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        if self.is_punct("{") {
            self.bump();
            let mut out = Vec::new();
            while !self.is_punct("}") {
                if self.peek().tok == Tok::Eof {
                    return Err(self.error_here("`}`"));
                }
                out.push(self.stmt()?);
            }
            self.bump();
            Ok(out)
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn paren_cond(&mut self) -> Result<Cond, ParseError> {
        self.expect_punct("(")?;
        let c = self.cond()?;
        self.expect_punct(")")?;
        Ok(c)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let line = self.peek().line;
        let kind = if self.is_keyword("if") {
            self.bump();
            let c = self.paren_cond()?;
            let then_b = self.block()?;
            let else_b = if self.is_keyword("else") {
                self.bump();
                self.block()?
            } else {
                Vec::new()
            };
            StmtKind::If(c, then_b, else_b)
        } else if self.is_keyword("while") {
            self.bump();
            let c = self.paren_cond()?;
            StmtKind::While(c, self.block()?)
        } else if self.is_keyword("assert") {
            self.bump();
            let c = self.paren_cond()?;
            if c == Cond::Nondet {
                return Err(ParseError { line, col: 1, message: "assertion condition cannot be `*`".into() });
            }
            self.expect_punct(";")?;
            StmtKind::Assert(c)
        } else if self.is_keyword("access") {
            self.bump();
            self.expect_punct("(")?;
            let (block, _, _) = self.ident()?;
            self.expect_punct(")")?;
            self.expect_punct(";")?;
            StmtKind::Access(block)
        } else if self.is_keyword("int") {
            return Err(self.error_here("statement (declarations must precede statements)"));
        } else {
            let v = self.use_var()?;
            self.expect_punct("=")?;
            let e = self.expr()?;
            self.expect_punct(";")?;
            StmtKind::Assign(v, e)
        };
        Ok(Stmt { kind, line })
    }

    fn cond(&mut self) -> Result<Cond, ParseError> {
        if self.is_keyword("true") {
            self.bump();
            return Ok(Cond::Bool(true));
        }
        if self.is_keyword("false") {
            self.bump();
            return Ok(Cond::Bool(false));
        }
        // A lone `*` followed by `)` is the nondeterministic condition.
        if self.is_punct("*") && matches!(self.toks[self.pos + 1].tok, Tok::Punct(")")) {
            self.bump();
            return Ok(Cond::Nondet);
        }
        let l = self.expr()?;
        let op = match &self.peek().tok {
            Tok::Punct("<") => RelOp::Lt,
            Tok::Punct("<=") => RelOp::Le,
            Tok::Punct("==") => RelOp::Eq,
            Tok::Punct("!=") => RelOp::Ne,
            Tok::Punct(">=") => RelOp::Ge,
            Tok::Punct(">") => RelOp::Gt,
            _ => return Err(self.error_here("comparison operator")),
        };
        self.bump();
        let r = self.expr()?;
        Ok(Cond::Cmp(l, op, r))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.term()?;
        loop {
            if self.is_punct("+") {
                self.bump();
                e = Expr::add(e, self.term()?);
            } else if self.is_punct("-") {
                self.bump();
                e = Expr::sub(e, self.term()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        match self.peek().tok.clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Const(n))
            }
            Tok::Punct("*") => {
                self.bump();
                Ok(Expr::Nondet)
            }
            Tok::Punct("-") => {
                self.bump();
                match self.term()? {
                    Expr::Const(n) => Ok(Expr::Const(-n)),
                    e => Ok(Expr::sub(Expr::Const(0), e)),
                }
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(Expr::Var(self.use_var()?)),
            _ => Err(self.error_here("expression")),
        }
    }
}

fn s_of(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => s.clone(),
        _ => unreachable!(),
    }
}

/// Parses a toy-language program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, declared: HashSet::new() };
    p.program()
}
