//! Relational signatures and first-order formulas.
//!
//! Formulas are built by [`parse_formula`] against a [`Signature`]. The parser
//! renames bound variables so that no binder reuses a name that is free in the
//! formula or bound elsewhere in it; evaluation can then extend an environment
//! without ever substituting.

mod parser;
mod printer;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parser::{parse_formula, ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("relation `{0}` must have arity at least 1")]
    ZeroArity(String),
    #[error("`{0}` is not a valid identifier")]
    InvalidIdentifier(String),
    #[error("`{0}` is a reserved word")]
    ReservedWord(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignature {
    relations: Vec<RelationSymbol>,
    #[serde(default)]
    constants: Vec<String>,
}

/// A relational vocabulary with optional constant symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSignature")]
pub struct Signature {
    relations: Vec<RelationSymbol>,
    constants: Vec<String>,
}

impl TryFrom<RawSignature> for Signature {
    type Error = SignatureError;

    fn try_from(raw: RawSignature) -> Result<Self, Self::Error> {
        Signature::new(raw.relations, raw.constants)
    }
}

pub(crate) const RESERVED: [&str; 4] = ["forall", "exists", "true", "false"];

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Signature {
    pub fn new(
        relations: Vec<RelationSymbol>,
        constants: Vec<String>,
    ) -> Result<Self, SignatureError> {
        let mut seen = BTreeSet::new();
        let names = relations
            .iter()
            .map(|r| r.name.as_str())
            .chain(constants.iter().map(String::as_str));
        for name in names {
            if !is_identifier(name) {
                return Err(SignatureError::InvalidIdentifier(name.to_string()));
            }
            if RESERVED.contains(&name) {
                return Err(SignatureError::ReservedWord(name.to_string()));
            }
            if !seen.insert(name) {
                return Err(SignatureError::DuplicateSymbol(name.to_string()));
            }
        }
        if let Some(r) = relations.iter().find(|r| r.arity == 0) {
            return Err(SignatureError::ZeroArity(r.name.clone()));
        }
        Ok(Signature {
            relations,
            constants,
        })
    }

    /// Convenience constructor from `(name, arity)` pairs.
    pub fn relational<S: Into<String>>(
        relations: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Self, SignatureError> {
        let relations = relations
            .into_iter()
            .map(|(name, arity)| RelationSymbol {
                name: name.into(),
                arity,
            })
            .collect();
        Signature::new(relations, Vec::new())
    }

    /// Unary `P0`, `P1` and binary `R`.
    pub fn k23() -> Self {
        Signature::relational([("P0", 1), ("P1", 1), ("R", 2)]).expect("static signature")
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn arity(&self, relation: &str) -> Option<usize> {
        self.relations
            .iter()
            .find(|r| r.name == relation)
            .map(|r| r.arity)
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom { relation: String, args: Vec<Term> },
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    ForAll(String, Box<Formula>),
}

impl Formula {
    pub fn atom<S: Into<String>>(relation: &str, vars: impl IntoIterator<Item = S>) -> Self {
        Formula::Atom {
            relation: relation.to_string(),
            args: vars.into_iter().map(|v| Term::Var(v.into())).collect(),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(v: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn forall(v: impl Into<String>, body: Formula) -> Self {
        Formula::ForAll(v.into(), Box::new(body))
    }

    /// `exists v1. exists v2. ... body`
    pub fn exists_all<S: Into<String>>(vars: impl IntoIterator<Item = S>, body: Formula) -> Self {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        vars.into_iter()
            .rev()
            .fold(body, |acc, v| Formula::exists(v, acc))
    }

    /// Free variables in order of first occurrence, left to right.
    pub fn free_variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Every variable name that appears anywhere, bound or free.
    pub(crate) fn all_variable_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { args, .. } => {
                for t in args {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Eq(a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Not(f) => f.all_variable_names(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.all_variable_names(out);
                b.all_variable_names(out);
            }
            Formula::Exists(v, f) | Formula::ForAll(v, f) => {
                out.insert(v.clone());
                f.all_variable_names(out);
            }
        }
    }

    /// Checks every atom against the signature.
    pub fn check_signature(&self, sig: &Signature) -> Result<(), ParseErrorKind> {
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Atom { relation, args } => {
                let arity = sig
                    .arity(relation)
                    .ok_or_else(|| ParseErrorKind::UnknownSymbol(relation.clone()))?;
                if arity != args.len() {
                    return Err(ParseErrorKind::ArityMismatch {
                        relation: relation.clone(),
                        expected: arity,
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|t| check_term(t, sig))
            }
            Formula::Eq(a, b) => {
                check_term(a, sig)?;
                check_term(b, sig)
            }
            Formula::Not(f) | Formula::Exists(_, f) | Formula::ForAll(_, f) => {
                f.check_signature(sig)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.check_signature(sig)?;
                b.check_signature(sig)
            }
        }
    }
}

fn check_term(t: &Term, sig: &Signature) -> Result<(), ParseErrorKind> {
    match t {
        Term::Const(c) if !sig.has_constant(c) => Err(ParseErrorKind::UnknownSymbol(c.clone())),
        _ => Ok(()),
    }
}

fn push_var(t: &Term, bound: &[String], out: &mut Vec<String>) {
    if let Term::Var(v) = t {
        if !bound.contains(v) && !out.contains(v) {
            out.push(v.clone());
        }
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom { args, .. } => {
            for t in args {
                push_var(t, bound, out);
            }
        }
        Formula::Eq(a, b) => {
            push_var(a, bound, out);
            push_var(b, bound, out);
        }
        Formula::Not(g) => collect_free(g, bound, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Formula::Exists(v, g) | Formula::ForAll(v, g) => {
            bound.push(v.clone());
            collect_free(g, bound, out);
            bound.pop();
        }
    }
}

/// Split of a formula's free variables into object variables (counted) and
/// parameter variables (fixed per fiber).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariablePartition {
    object: Vec<String>,
    parameter: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("variable `{0}` listed twice in the partition")]
    Repeated(String),
    #[error("free variable `{0}` is neither object, parameter nor assigned")]
    Uncovered(String),
}

impl VariablePartition {
    pub fn new<S: Into<String>>(
        object: impl IntoIterator<Item = S>,
        parameter: impl IntoIterator<Item = S>,
    ) -> Result<Self, PartitionError> {
        let object: Vec<String> = object.into_iter().map(Into::into).collect();
        let parameter: Vec<String> = parameter.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for v in object.iter().chain(&parameter) {
            if !seen.insert(v.as_str()) {
                return Err(PartitionError::Repeated(v.clone()));
            }
        }
        Ok(VariablePartition { object, parameter })
    }

    /// All free variables of `f` become object variables.
    pub fn all_object(f: &Formula) -> Self {
        VariablePartition {
            object: f.free_variables(),
            parameter: Vec::new(),
        }
    }

    pub fn object(&self) -> &[String] {
        &self.object
    }

    pub fn parameter(&self) -> &[String] {
        &self.parameter
    }

    pub fn swapped(&self) -> Self {
        VariablePartition {
            object: self.parameter.clone(),
            parameter: self.object.clone(),
        }
    }

    /// Object variables followed by parameter variables.
    pub fn combined(&self) -> Vec<String> {
        self.object.iter().chain(&self.parameter).cloned().collect()
    }
}

impl fmt::Display for VariablePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {}",
            self.object.join(","),
            self.parameter.join(",")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::k23()
    }

    #[test]
    fn signature_rejects_duplicates_and_zero_arity() {
        assert_eq!(
            Signature::relational([("R", 2), ("R", 1)]),
            Err(SignatureError::DuplicateSymbol("R".into()))
        );
        assert_eq!(
            Signature::relational([("R", 0)]),
            Err(SignatureError::ZeroArity("R".into()))
        );
        let rel = vec![RelationSymbol {
            name: "c".into(),
            arity: 1,
        }];
        assert!(matches!(
            Signature::new(rel, vec!["c".into()]),
            Err(SignatureError::DuplicateSymbol(_))
        ));
    }

    #[test]
    fn signature_json_rejects_unknown_fields() {
        let ok: Signature =
            serde_json::from_str(r#"{"relations":[{"name":"R","arity":2}],"constants":["c"]}"#)
                .unwrap();
        assert_eq!(ok.arity("R"), Some(2));
        assert!(serde_json::from_str::<Signature>(r#"{"relations":[],"sorts":[]}"#).is_err());
        assert!(
            serde_json::from_str::<Signature>(r#"{"relations":[{"name":"R","arity":0}]}"#).is_err()
        );
    }

    #[test]
    fn free_variables_first_occurrence() {
        let s = sig();
        let f = parse_formula("R(x,y)", &s).unwrap();
        assert_eq!(f.free_variables(), ["x", "y"]);
        let f = parse_formula("forall x. R(x,y)", &s).unwrap();
        assert_eq!(f.free_variables(), ["y"]);
        let f = parse_formula("R(y,x) & P0(z) & P1(y)", &s).unwrap();
        assert_eq!(f.free_variables(), ["y", "x", "z"]);
    }

    #[test]
    fn constant_equality_has_no_free_variables() {
        let s = Signature::new(vec![], vec!["c".into()]).unwrap();
        let f = parse_formula("c = c", &s).unwrap();
        assert_eq!(
            f,
            Formula::Eq(Term::Const("c".into()), Term::Const("c".into()))
        );
        assert!(f.free_variables().is_empty());
    }

    #[test]
    fn sentences() {
        let s = sig();
        assert!(parse_formula("forall x. P0(x) | P1(x)", &s)
            .unwrap()
            .is_sentence());
        assert!(!parse_formula("R(x,y)", &s).unwrap().is_sentence());
        assert!(!parse_formula("exists y. R(x,y)", &s).unwrap().is_sentence());
    }

    #[test]
    fn free_variables_of_exists_removes_bound() {
        let s = sig();
        let body = parse_formula("R(x,y) & P0(z)", &s).unwrap();
        let ex = Formula::exists("y", body.clone());
        let mut expected = body.free_variables();
        expected.retain(|v| v != "y");
        assert_eq!(ex.free_variables(), expected);
    }

    #[test]
    fn partition_rejects_repeats() {
        assert_eq!(
            VariablePartition::new(["x"], ["x"]),
            Err(PartitionError::Repeated("x".into()))
        );
        let p = VariablePartition::new(["x"], ["y"]).unwrap();
        assert_eq!(p.swapped().object(), ["y"]);
        assert_eq!(p.combined(), ["x", "y"]);
    }
}
