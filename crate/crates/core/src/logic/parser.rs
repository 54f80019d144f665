//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula := iff
//! iff     := imp ("<->" imp)*
//! imp     := or ("->" or)*            right-associative
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "forall" var "." formula | "exists" var "." formula | atom
//! atom    := name "(" term ("," term)* ")" | term "=" term | "(" formula ")"
//!          | "true" | "false"
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{Formula, Signature, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("relation `{relation}` has arity {expected} but was given {found} argument(s)")]
    ArityMismatch {
        relation: String,
        expected: usize,
        found: usize,
    },
}

/// A parse failure at a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at position {}", self.kind, self.position)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Not,
    Arrow,
    DoubleArrow,
    Equals,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::Not => f.write_str("`!`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::DoubleArrow => f.write_str("`<->`"),
            Tok::Equals => f.write_str("`=`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'.' => Tok::Dot,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'!' => Tok::Not,
            b'=' => Tok::Equals,
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Tok::Arrow
            }
            b'<' if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') => {
                i += 2;
                Tok::DoubleArrow
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    kind: ParseErrorKind::Syntax(format!("unexpected character `{ch}`")),
                    position: start,
                });
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: &'a Signature,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError {
            kind,
            position: self.offset(),
        })
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, ParseError> {
        self.error(ParseErrorKind::Syntax(format!(
            "expected {expected}, found {}",
            self.peek()
        )))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(expected)
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::DoubleArrow {
            self.bump();
            let rhs = self.imp()?;
            lhs = Formula::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.imp()?;
            return Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Tok::Ident(kw) if kw == "forall" || kw == "exists" => {
                self.bump();
                let var = self.variable()?;
                self.expect(Tok::Dot, "`.` after quantified variable")?;
                let body = Box::new(self.formula()?);
                Ok(if kw == "forall" {
                    Formula::ForAll(var, body)
                } else {
                    Formula::Exists(var, body)
                })
            }
            _ => self.atom(),
        }
    }

    fn variable(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if super::RESERVED.contains(&name.as_str()) => {
                self.unexpected("a variable")
            }
            Tok::Ident(name) => {
                if self.sig.has_constant(&name) || self.sig.arity(&name).is_some() {
                    return self.error(ParseErrorKind::Syntax(format!(
                        "`{name}` is a signature symbol and cannot be quantified"
                    )));
                }
                self.bump();
                Ok(name)
            }
            _ => self.unexpected("a variable"),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(name) if name == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(name) if name == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::LParen => {
                let at = self.offset();
                let Some(arity) = self.sig.arity(&name) else {
                    return self.error(ParseErrorKind::UnknownSymbol(name));
                };
                self.bump();
                self.bump();
                let mut args = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
                self.expect(Tok::RParen, "`,` or `)`")?;
                if args.len() != arity {
                    return Err(ParseError {
                        kind: ParseErrorKind::ArityMismatch {
                            relation: name,
                            expected: arity,
                            found: args.len(),
                        },
                        position: at,
                    });
                }
                Ok(Formula::Atom {
                    relation: name,
                    args,
                })
            }
            Tok::Ident(_) => {
                let lhs = self.term()?;
                self.expect(Tok::Equals, "`=` or `(`")?;
                let rhs = self.term()?;
                Ok(Formula::Eq(lhs, rhs))
            }
            _ => self.unexpected("a formula"),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if super::RESERVED.contains(&name.as_str()) => {
                self.unexpected("a term")
            }
            Tok::Ident(name) => {
                if self.sig.arity(&name).is_some() {
                    return self.error(ParseErrorKind::Syntax(format!(
                        "relation `{name}` used as a term"
                    )));
                }
                self.bump();
                Ok(if self.sig.has_constant(&name) {
                    Term::Const(name)
                } else {
                    Term::Var(name)
                })
            }
            _ => self.unexpected("a term"),
        }
    }
}

/// Parses `text` against `sig`, then renames bound variables so every binder
/// carries a name that is neither free in the formula nor bound elsewhere.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, sig };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.unexpected("end of input");
    }
    Ok(rename_bound(&f))
}

pub(crate) fn rename_bound(f: &Formula) -> Formula {
    let mut taken = BTreeSet::new();
    f.all_variable_names(&mut taken);
    let mut claimed: BTreeSet<String> = f.free_variables().into_iter().collect();
    let mut scope = BTreeMap::new();
    rename(f, &mut scope, &mut claimed, &mut taken)
}

fn fresh(base: &str, taken: &mut BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
    let stem = if stem.is_empty() { base } else { stem };
    (1..)
        .map(|k| format!("{stem}_{k}"))
        .find(|n| !taken.contains(n))
        .inspect(|n| {
            taken.insert(n.clone());
        })
        .expect("unbounded candidate supply")
}

fn rename_term(t: &Term, scope: &BTreeMap<String, String>) -> Term {
    match t {
        Term::Var(v) => Term::Var(scope.get(v).cloned().unwrap_or_else(|| v.clone())),
        Term::Const(_) => t.clone(),
    }
}

fn rename(
    f: &Formula,
    scope: &mut BTreeMap<String, String>,
    claimed: &mut BTreeSet<String>,
    taken: &mut BTreeSet<String>,
) -> Formula {
    let bin = |a: &Formula,
               b: &Formula,
               scope: &mut BTreeMap<String, String>,
               claimed: &mut _,
               taken: &mut _| {
        (
            Box::new(rename(a, scope, claimed, taken)),
            Box::new(rename(b, scope, claimed, taken)),
        )
    };
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom { relation, args } => Formula::Atom {
            relation: relation.clone(),
            args: args.iter().map(|t| rename_term(t, scope)).collect(),
        },
        Formula::Eq(a, b) => Formula::Eq(rename_term(a, scope), rename_term(b, scope)),
        Formula::Not(g) => Formula::Not(Box::new(rename(g, scope, claimed, taken))),
        Formula::And(a, b) => {
            let (a, b) = bin(a, b, scope, claimed, taken);
            Formula::And(a, b)
        }
        Formula::Or(a, b) => {
            let (a, b) = bin(a, b, scope, claimed, taken);
            Formula::Or(a, b)
        }
        Formula::Implies(a, b) => {
            let (a, b) = bin(a, b, scope, claimed, taken);
            Formula::Implies(a, b)
        }
        Formula::Iff(a, b) => {
            let (a, b) = bin(a, b, scope, claimed, taken);
            Formula::Iff(a, b)
        }
        Formula::Exists(v, g) | Formula::ForAll(v, g) => {
            let name = if claimed.contains(v) {
                fresh(v, taken)
            } else {
                v.clone()
            };
            claimed.insert(name.clone());
            let prev = scope.insert(v.clone(), name.clone());
            let body = Box::new(rename(g, scope, claimed, taken));
            match prev {
                Some(p) => scope.insert(v.clone(), p),
                None => scope.remove(v),
            };
            if matches!(f, Formula::Exists(..)) {
                Formula::Exists(name, body)
            } else {
                Formula::ForAll(name, body)
            }
        }
    }
}
