//! Parser for the `.bn` rule format.
//!
//! ```text
//! # comment
//! input U
//! X1 = X2 & !U
//! X2 = (X1 | X2) <-> 1
//! output Y1 = X1
//! ```
//!
//! Operator precedence, loosest first: `<->`, `|`, `^`, `&`, `!`. Binary
//! operators associate to the left. Names may carry a parenthesised suffix
//! such as `PLCg(act)`. A file without any `output` line treats rules named
//! `Y<digits>` as outputs.

use std::collections::HashMap;

use thiserror::Error;

use super::{BoolExpr, BooleanNetwork, NetworkError, VarId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: undeclared variable `{name}`")]
    Undeclared {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("line {line}: duplicate declaration of `{name}`")]
    Duplicate { line: usize, name: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Length of the name starting at `start`, if one starts there.
pub(crate) fn lex_name(s: &[u8], start: usize) -> Option<usize> {
    let first = *s.get(start)?;
    if !(first.is_ascii_alphabetic() || first == b'_') {
        return None;
    }
    let word = |i: usize| {
        s.get(i)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
    };
    let mut end = start + 1;
    loop {
        while word(end) {
            end += 1;
        }
        // `(alnum)` suffix, only when it closes immediately
        if s.get(end) == Some(&b'(') && word(end + 1) {
            let mut j = end + 1;
            while word(j) {
                j += 1;
            }
            if s.get(j) == Some(&b')') {
                end = j + 1;
                continue;
            }
        }
        return Some(end);
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Const(bool),
    Not,
    And,
    Or,
    Xor,
    Iff,
    LParen,
    RParen,
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    end_col: usize,
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Lexed, ParseError> {
    let s = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |i: usize, message: String| ParseError::Syntax {
        line,
        column: col0 + i,
        message,
    };
    while i < s.len() {
        let c = s[i];
        let single = match c {
            b' ' | b'\t' | b'\r' => {
                i += 1;
                continue;
            }
            b'!' | b'~' => Some(Tok::Not),
            b'&' => Some(Tok::And),
            b'|' => Some(Tok::Or),
            b'^' => Some(Tok::Xor),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'0' => Some(Tok::Const(false)),
            b'1' => Some(Tok::Const(true)),
            _ => None,
        };
        if let Some(t) = single {
            if matches!(t, Tok::Const(_)) && s.get(i + 1).is_some_and(|c| c.is_ascii_alphanumeric())
            {
                return Err(err(i, "names must not start with a digit".into()));
            }
            toks.push((t, col0 + i));
            i += 1;
        } else if s[i..].starts_with(b"<->") {
            toks.push((Tok::Iff, col0 + i));
            i += 3;
        } else if let Some(end) = lex_name(s, i) {
            toks.push((Tok::Name(text[i..end].to_string()), col0 + i));
            i = end;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(err(i, format!("unexpected character `{ch}`")));
        }
    }
    Ok(Lexed {
        toks,
        end_col: col0 + s.len(),
    })
}

struct ExprParser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    end_col: usize,
    resolve: &'a dyn Fn(&str) -> Option<VarId>,
}

impl ExprParser<'_> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            column: self.col(),
            message: message.into(),
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.toks.get(self.pos).map(|x| &x.0) == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn binary(
        &mut self,
        op: Tok,
        next: fn(&mut Self) -> Result<BoolExpr, ParseError>,
        build: fn(BoolExpr, BoolExpr) -> BoolExpr,
    ) -> Result<BoolExpr, ParseError> {
        let mut lhs = next(self)?;
        while self.eat(&op) {
            let rhs = next(self)?;
            lhs = build(lhs, rhs);
        }
        Ok(lhs)
    }

    fn iff(&mut self) -> Result<BoolExpr, ParseError> {
        self.binary(Tok::Iff, Self::or, BoolExpr::iff)
    }

    fn or(&mut self) -> Result<BoolExpr, ParseError> {
        self.binary(Tok::Or, Self::xor, BoolExpr::or)
    }

    fn xor(&mut self) -> Result<BoolExpr, ParseError> {
        self.binary(Tok::Xor, Self::and, BoolExpr::xor)
    }

    fn and(&mut self) -> Result<BoolExpr, ParseError> {
        self.binary(Tok::And, Self::unary, BoolExpr::and)
    }

    fn unary(&mut self) -> Result<BoolExpr, ParseError> {
        if self.eat(&Tok::Not) {
            return Ok(BoolExpr::not(self.unary()?));
        }
        let Some((tok, col)) = self.toks.get(self.pos).cloned() else {
            return Err(self.syntax("unexpected end of expression"));
        };
        self.pos += 1;
        match tok {
            Tok::Const(b) => Ok(BoolExpr::Const(b)),
            Tok::Name(name) => match (self.resolve)(&name) {
                Some(id) => Ok(BoolExpr::Var(id)),
                None => Err(ParseError::Undeclared {
                    line: self.line,
                    column: col,
                    name,
                }),
            },
            Tok::LParen => {
                let e = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(e)
            }
            _ => {
                self.pos -= 1;
                Err(self.syntax("expected a name, constant, `!` or `(`"))
            }
        }
    }

    fn finish(mut self) -> Result<BoolExpr, ParseError> {
        let e = self.iff()?;
        if self.pos < self.toks.len() {
            return Err(self.syntax("unexpected token after expression"));
        }
        Ok(e)
    }
}

fn parse_tokens(
    lexed: &Lexed,
    line: usize,
    resolve: &dyn Fn(&str) -> Option<VarId>,
) -> Result<BoolExpr, ParseError> {
    ExprParser {
        toks: &lexed.toks,
        pos: 0,
        line,
        end_col: lexed.end_col,
        resolve,
    }
    .finish()
}

/// Parses a single expression whose variables are looked up in `names`.
pub fn parse_expr<N: AsRef<str>>(text: &str, names: &[N]) -> Result<BoolExpr, ParseError> {
    let lexed = lex(text, 1, 1)?;
    let resolve = |n: &str| names.iter().position(|m| m.as_ref() == n);
    parse_tokens(&lexed, 1, &resolve)
}

enum Decl<'a> {
    Input,
    Rule { rhs: &'a str, col: usize },
    Output { rhs: &'a str, col: usize },
}

fn keyword<'a>(body: &'a str, kw: &str) -> Option<&'a str> {
    let rest = body.strip_prefix(kw)?;
    rest.starts_with([' ', '\t']).then(|| rest.trim_start())
}

pub fn parse_network(text: &str) -> Result<BooleanNetwork, ParseError> {
    // Pass 1: declarations.
    let mut decls: Vec<(usize, String, Decl)> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let content = raw.split('#').next().unwrap_or("");
        let body = content.trim_start();
        if body.trim().is_empty() {
            continue;
        }
        let indent = content.len() - body.len();
        let (is_input, is_output, rest) = if let Some(r) = keyword(body, "input") {
            (true, false, r)
        } else if let Some(r) = keyword(body, "output") {
            (false, true, r)
        } else {
            (false, false, body)
        };
        let name_col = indent + (body.len() - rest.len()) + 1;
        let syntax = |column: usize, message: &str| ParseError::Syntax {
            line,
            column,
            message: message.to_string(),
        };
        let end =
            lex_name(rest.as_bytes(), 0).ok_or_else(|| syntax(name_col, "expected a node name"))?;
        let name = rest[..end].to_string();
        let after = &rest[end..];
        let decl = if is_input {
            if !after.trim().is_empty() {
                return Err(syntax(name_col + end, "unexpected text after input name"));
            }
            Decl::Input
        } else {
            let trimmed = after.trim_start();
            let eq_col = name_col + end + (after.len() - trimmed.len());
            let Some(rhs) = trimmed.strip_prefix('=') else {
                return Err(syntax(eq_col, "expected `=`"));
            };
            let col = eq_col + 1;
            if is_output {
                Decl::Output { rhs, col }
            } else {
                Decl::Rule { rhs, col }
            }
        };
        if seen.insert(name.clone(), line).is_some() {
            return Err(ParseError::Duplicate { line, name });
        }
        decls.push((line, name, decl));
    }

    let explicit_outputs = decls.iter().any(|d| matches!(d.2, Decl::Output { .. }));
    let implicit_output = |name: &str| {
        !explicit_outputs
            && name.len() > 1
            && name.starts_with('Y')
            && name[1..].bytes().all(|b| b.is_ascii_digit())
    };
    let mut var_ids: HashMap<&str, VarId> = HashMap::new();
    for (_, name, decl) in &decls {
        let is_var = match decl {
            Decl::Input => true,
            Decl::Rule { .. } => !implicit_output(name),
            Decl::Output { .. } => false,
        };
        if is_var {
            let id = var_ids.len();
            var_ids.insert(name, id);
        }
    }

    // Pass 2: expressions.
    let resolve = |n: &str| var_ids.get(n).copied();
    let mut vars = Vec::new();
    let mut outputs = Vec::new();
    for (line, name, decl) in &decls {
        match decl {
            Decl::Input => vars.push((name.clone(), None)),
            Decl::Rule { rhs, col } | Decl::Output { rhs, col } => {
                let lexed = lex(rhs, *line, *col)?;
                let expr = parse_tokens(&lexed, *line, &resolve)?;
                if matches!(decl, Decl::Output { .. }) || implicit_output(name) {
                    outputs.push((name.clone(), expr));
                } else {
                    vars.push((name.clone(), Some(expr)));
                }
            }
        }
    }
    Ok(BooleanNetwork::new(vars, outputs)?)
}
