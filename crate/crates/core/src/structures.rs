//! Finite structures and indexed families of them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Formula, Signature};

/// Dense bitmaps are used for relation lookups up to this many cells.
const DENSE_LIMIT: usize = 1 << 26;

pub const DEFAULT_MAX_TABLE_TUPLES: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("index {index} outside the family's index domain {lo}..{hi}")]
    IndexOutOfDomain { index: u64, lo: u64, hi: u64 },
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("family member {index} is invalid: {}", .violations.join("; "))]
    InvalidMember { index: u64, violations: Vec<String> },
    #[error("table family holds {found} tuples, above the cap of {cap}")]
    TooLarge { found: usize, cap: usize },
    #[error("malformed family spec: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read family spec: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0} is not a sentence")]
    NotASentence(String),
    #[error(transparent)]
    Eval(#[from] crate::counting::CountingError),
}

#[derive(Debug, Clone)]
pub(crate) enum Lookup {
    Dense(Vec<u64>),
    Sparse(HashSet<Vec<usize>>),
}

/// One relation's extension: a set of index tuples.
#[derive(Debug, Clone)]
pub struct RelationTable {
    arity: usize,
    tuples: BTreeSet<Vec<usize>>,
    lookup: OnceLock<Lookup>,
}

impl PartialEq for RelationTable {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.tuples == other.tuples
    }
}

impl Eq for RelationTable {}

impl RelationTable {
    pub fn new(arity: usize, tuples: impl IntoIterator<Item = Vec<usize>>) -> Self {
        RelationTable {
            arity,
            tuples: tuples.into_iter().collect(),
            lookup: OnceLock::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.tuples.iter()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.tuples.contains(tuple)
    }

    pub(crate) fn lookup(&self, size: usize) -> &Lookup {
        self.lookup.get_or_init(|| {
            let cells = size.checked_pow(self.arity as u32);
            match cells {
                Some(cells) if cells <= DENSE_LIMIT => {
                    let mut bits = vec![0u64; cells.div_ceil(64).max(1)];
                    for t in self.tuples.iter().filter(|t| t.iter().all(|&e| e < size)) {
                        let idx = t.iter().rev().fold(0usize, |acc, &e| acc * size + e);
                        bits[idx / 64] |= 1 << (idx % 64);
                    }
                    Lookup::Dense(bits)
                }
                _ => Lookup::Sparse(self.tuples.iter().cloned().collect()),
            }
        })
    }
}

/// A finite structure over the universe `{0, …, size-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteStructure {
    size: usize,
    relations: BTreeMap<String, RelationTable>,
    constants: BTreeMap<String, usize>,
}

impl FiniteStructure {
    /// Builds a structure without checking it; see [`validate_structure`].
    pub fn from_parts(
        size: usize,
        relations: BTreeMap<String, RelationTable>,
        constants: BTreeMap<String, usize>,
    ) -> Self {
        FiniteStructure {
            size,
            relations,
            constants,
        }
    }

    /// A structure with every relation of `sig` empty and no constants mapped.
    pub fn empty(sig: &Signature, size: usize) -> Self {
        let relations = sig
            .relations()
            .iter()
            .map(|r| (r.name.clone(), RelationTable::new(r.arity, [])))
            .collect();
        FiniteStructure::from_parts(size, relations, BTreeMap::new())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relation(&self, name: &str) -> Option<&RelationTable> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> &BTreeMap<String, RelationTable> {
        &self.relations
    }

    pub fn constant(&self, name: &str) -> Option<usize> {
        self.constants.get(name).copied()
    }

    pub fn constants(&self) -> &BTreeMap<String, usize> {
        &self.constants
    }

    pub fn relation_len(&self, name: &str) -> usize {
        self.relation(name).map_or(0, RelationTable::len)
    }
}

/// Reports an empty universe and every out-of-range tuple, wrong-arity tuple, undeclared or missing
/// relation and unmapped constant. An empty list means the structure is valid.
pub fn validate_structure(s: &FiniteStructure, sig: &Signature) -> Vec<String> {
    let mut violations = Vec::new();
    if s.size == 0 {
        violations.push("universe is empty".to_string());
    }
    for (name, table) in &s.relations {
        match sig.arity(name) {
            None => violations.push(format!("relation `{name}` is not declared")),
            Some(a) if a != table.arity => violations.push(format!(
                "relation `{name}` has arity {} but is declared with arity {a}",
                table.arity
            )),
            Some(_) => {}
        }
        for t in &table.tuples {
            if t.len() != table.arity {
                violations.push(format!(
                    "tuple {t:?} in `{name}` has length {} instead of {}",
                    t.len(),
                    table.arity
                ));
            }
            for &e in t.iter().filter(|&&e| e >= s.size) {
                violations.push(format!("tuple {t:?} in `{name}`: index {e} out of range"));
            }
        }
    }
    for r in sig.relations() {
        if !s.relations.contains_key(&r.name) {
            violations.push(format!("relation `{}` has no table", r.name));
        }
    }
    for c in sig.constants() {
        match s.constants.get(c) {
            None => violations.push(format!("constant `{c}` is not mapped")),
            Some(&e) if e >= s.size => {
                violations.push(format!("constant `{c}`: index {e} out of range"))
            }
            Some(_) => {}
        }
    }
    for c in s.constants.keys().filter(|c| !sig.has_constant(c)) {
        violations.push(format!("constant `{c}` is not declared"));
    }
    violations
}

/// Evaluates each sentence in `s`, in input order.
pub fn check_axioms(
    s: &FiniteStructure,
    sentences: &[Formula],
) -> Result<Vec<bool>, StructureError> {
    sentences
        .iter()
        .map(|f| {
            if !f.is_sentence() {
                return Err(StructureError::NotASentence(f.to_string()));
            }
            Ok(crate::counting::evaluate(s, f, &Default::default())?)
        })
        .collect()
}

/// The five axioms of the two-to-three bipartite theory, as formula text over
/// [`Signature::k23`].
pub const K23_AXIOMS: [&str; 5] = [
    "forall x. (P0(x) | P1(x)) & !(P0(x) & P1(x))",
    "forall x. forall y. R(x,y) -> P0(x) & P1(y)",
    "forall x. P0(x) -> exists y1. P1(y1) & R(x,y1) & exists y2. P1(y2) & R(x,y2) & !y2 = y1 \
     & exists y3. P1(y3) & R(x,y3) & !y3 = y1 & !y3 = y2 \
     & forall y. P1(y) & R(x,y) -> y = y1 | y = y2 | y = y3",
    "forall y. P1(y) -> exists x1. P0(x1) & R(x1,y) & exists x2. P0(x2) & R(x2,y) & !x2 = x1 \
     & forall x. P0(x) & R(x,y) -> x = x1 | x = x2",
    "forall x. P0(x) -> forall y. P1(y) & R(x,y) -> forall x2. P0(x2) & R(x2,y) \
     -> forall y2. P1(y2) & R(x,y2) -> R(x2,y2)",
];

pub fn k23_axioms() -> Vec<Formula> {
    let sig = Signature::k23();
    K23_AXIOMS
        .iter()
        .map(|a| crate::logic::parse_formula(a, &sig).expect("static axiom"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoParams {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BipartiteParams {
    pub p: usize,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableMember {
    pub size: usize,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(default)]
    pub constants: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    K23 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<NoParams>,
    },
    PureSet {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<NoParams>,
    },
    Bipartite {
        params: BipartiteParams,
    },
    Table {
        members: BTreeMap<String, TableMember>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamilySpec {
    signature: Signature,
    generator: Generator,
    index_domain: [u64; 2],
}

/// An indexed family `(M_n : lo <= n <= hi)` of finite structures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilySpec {
    signature: Signature,
    generator: Generator,
    index_domain: [u64; 2],
    #[serde(skip)]
    max_table_tuples: usize,
}

impl FamilySpec {
    pub fn new(
        signature: Signature,
        generator: Generator,
        index_domain: [u64; 2],
    ) -> Result<Self, StructureError> {
        FamilySpec::with_table_cap(signature, generator, index_domain, DEFAULT_MAX_TABLE_TUPLES)
    }

    pub fn with_table_cap(
        signature: Signature,
        generator: Generator,
        index_domain: [u64; 2],
        max_table_tuples: usize,
    ) -> Result<Self, StructureError> {
        let [lo, hi] = index_domain;
        if lo == 0 || lo > hi {
            return Err(StructureError::InvalidParameter(format!(
                "index domain must be a nonempty range of positive integers, got [{lo}, {hi}]"
            )));
        }
        let spec = FamilySpec {
            signature,
            generator,
            index_domain,
            max_table_tuples,
        };
        spec.check_generator()?;
        Ok(spec)
    }

    pub fn k23(max_index: u64) -> Self {
        FamilySpec::new(
            Signature::k23(),
            Generator::K23 { params: None },
            [1, max_index],
        )
        .expect("builtin family")
    }

    pub fn pure_set(max_index: u64) -> Self {
        FamilySpec::new(
            Signature::relational::<&str>([]).expect("empty signature"),
            Generator::PureSet { params: None },
            [1, max_index],
        )
        .expect("builtin family")
    }

    pub fn bipartite(p: usize, q: usize, max_index: u64) -> Result<Self, StructureError> {
        FamilySpec::new(
            Signature::k23(),
            Generator::Bipartite {
                params: BipartiteParams { p, q },
            },
            [1, max_index],
        )
    }

    pub fn from_json(text: &str) -> Result<Self, StructureError> {
        let raw: RawFamilySpec = serde_json::from_str(text)?;
        FamilySpec::new(raw.signature, raw.generator, raw.index_domain)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, StructureError> {
        FamilySpec::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn index_domain(&self) -> (u64, u64) {
        (self.index_domain[0], self.index_domain[1])
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self.generator, Generator::Table { .. })
    }

    /// Indices sampled when the caller gives none: 1..12 for builtins
    /// (clipped to the domain), the whole domain for tables.
    pub fn default_indices(&self) -> Vec<u64> {
        let (lo, hi) = self.index_domain();
        let hi = if self.is_builtin() {
            hi.min(lo.saturating_add(11))
        } else {
            hi
        };
        (lo..=hi).collect()
    }

    fn require_relations(&self, needed: &[(&str, usize)]) -> Result<(), StructureError> {
        for &(name, arity) in needed {
            if self.signature.arity(name) != Some(arity) {
                return Err(StructureError::InvalidParameter(format!(
                    "generator needs relation `{name}` of arity {arity} in the signature"
                )));
            }
        }
        Ok(())
    }

    fn check_generator(&self) -> Result<(), StructureError> {
        let builtin_no_constants = || {
            if self.signature.constants().is_empty() {
                Ok(())
            } else {
                Err(StructureError::InvalidParameter(
                    "builtin generators do not interpret constants".into(),
                ))
            }
        };
        match &self.generator {
            Generator::K23 { .. } => {
                builtin_no_constants()?;
                self.require_relations(&[("P0", 1), ("P1", 1), ("R", 2)])
            }
            Generator::Bipartite { params } => {
                builtin_no_constants()?;
                if params.p == 0 || params.q == 0 {
                    return Err(StructureError::InvalidParameter(format!(
                        "bipartite sides must be positive, got {}:{}",
                        params.p, params.q
                    )));
                }
                self.require_relations(&[("P0", 1), ("P1", 1), ("R", 2)])
            }
            Generator::PureSet { .. } => builtin_no_constants(),
            Generator::Table { members } => {
                let mut total = 0usize;
                let (lo, hi) = self.index_domain();
                for key in members.keys() {
                    let idx: u64 = key.parse().map_err(|_| {
                        StructureError::InvalidParameter(format!(
                            "table member key `{key}` is not a positive integer"
                        ))
                    })?;
                    if idx < lo || idx > hi {
                        return Err(StructureError::InvalidParameter(format!(
                            "table member {idx} lies outside the index domain"
                        )));
                    }
                }
                for idx in lo..=hi {
                    if !members.contains_key(&idx.to_string()) {
                        return Err(StructureError::InvalidParameter(format!(
                            "table family has no member for index {idx}"
                        )));
                    }
                }
                for m in members.values() {
                    total += m.relations.values().map(Vec::len).sum::<usize>();
                }
                if total > self.max_table_tuples {
                    return Err(StructureError::TooLarge {
                        found: total,
                        cap: self.max_table_tuples,
                    });
                }
                Ok(())
            }
        }
    }
}

fn bipartite_member(sig: &Signature, p: usize, q: usize, copies: usize) -> FiniteStructure {
    let block = p + q;
    let mut sources = Vec::with_capacity(p * copies);
    let mut targets = Vec::with_capacity(q * copies);
    let mut edges = Vec::with_capacity(p * q * copies);
    for k in 0..copies {
        let base = k * block;
        for s in base..base + p {
            sources.push(vec![s]);
            for t in base + p..base + block {
                edges.push(vec![s, t]);
            }
        }
        targets.extend((base + p..base + block).map(|t| vec![t]));
    }
    let mut s = FiniteStructure::empty(sig, block * copies);
    s.relations
        .insert("P0".into(), RelationTable::new(1, sources));
    s.relations
        .insert("P1".into(), RelationTable::new(1, targets));
    s.relations.insert("R".into(), RelationTable::new(2, edges));
    s
}

/// Builds member `index` of the family.
///
/// Bipartite layout: copy `k` occupies `[k(p+q), (k+1)(p+q))`, its first `p`
/// elements are the `P0` sources and the remaining `q` the `P1` targets, and
/// `R` holds every source-target pair of the copy.
pub fn build_member(spec: &FamilySpec, index: u64) -> Result<FiniteStructure, StructureError> {
    let (lo, hi) = spec.index_domain();
    if index < lo || index > hi {
        return Err(StructureError::IndexOutOfDomain { index, lo, hi });
    }
    let copies = usize::try_from(index)
        .map_err(|_| StructureError::InvalidParameter(format!("index {index} too large")))?;
    let sig = &spec.signature;
    let member = match &spec.generator {
        Generator::K23 { .. } => bipartite_member(sig, 2, 3, copies),
        Generator::Bipartite { params } => bipartite_member(sig, params.p, params.q, copies),
        Generator::PureSet { .. } => FiniteStructure::empty(sig, copies),
        Generator::Table { members } => {
            let m = members
                .get(&index.to_string())
                .ok_or(StructureError::IndexOutOfDomain { index, lo, hi })?;
            let mut relations: BTreeMap<String, RelationTable> = sig
                .relations()
                .iter()
                .map(|r| (r.name.clone(), RelationTable::new(r.arity, [])))
                .collect();
            for (name, tuples) in &m.relations {
                let arity = sig
                    .arity(name)
                    .unwrap_or_else(|| tuples.first().map_or(0, Vec::len));
                relations.insert(name.clone(), RelationTable::new(arity, tuples.clone()));
            }
            let s = FiniteStructure::from_parts(m.size, relations, m.constants.clone());
            let violations = validate_structure(&s, sig);
            if !violations.is_empty() {
                return Err(StructureError::InvalidMember { index, violations });
            }
            s
        }
    };
    Ok(member)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k23_first_member() {
        let m = build_member(&FamilySpec::k23(20), 1).unwrap();
        assert_eq!(m.size(), 5);
        assert_eq!(m.relation_len("P0"), 2);
        assert_eq!(m.relation_len("P1"), 3);
        assert_eq!(m.relation_len("R"), 6);
        assert!(m.relation("R").unwrap().contains(&[0, 2]));
        assert!(!m.relation("R").unwrap().contains(&[2, 0]));
    }

    #[test]
    fn k23_fourth_member() {
        let m = build_member(&FamilySpec::k23(20), 4).unwrap();
        assert_eq!(m.size(), 20);
        assert_eq!(m.relation_len("P0"), 8);
        assert_eq!(m.relation_len("P1"), 12);
        assert!(m.relation("P0").unwrap().contains(&[15]));
        assert!(m.relation("P1").unwrap().contains(&[17]));
        assert!(!m.relation("R").unwrap().contains(&[15, 12]));
    }

    #[test]
    fn k23_invariants_hold_up_to_twenty() {
        let spec = FamilySpec::k23(20);
        let axioms = k23_axioms();
        for n in 1..=20usize {
            let m = build_member(&spec, n as u64).unwrap();
            assert_eq!(m.size(), 5 * n);
            let p0: BTreeSet<_> = m.relation("P0").unwrap().tuples().collect();
            let p1: BTreeSet<_> = m.relation("P1").unwrap().tuples().collect();
            assert!(p0.is_disjoint(&p1));
            assert_eq!(
                (p0.len(), p1.len(), m.relation_len("R")),
                (2 * n, 3 * n, 6 * n)
            );
            assert!(check_axioms(&m, &axioms).unwrap().into_iter().all(|b| b));
        }
    }

    #[test]
    fn build_is_deterministic() {
        let spec = FamilySpec::k23(5);
        assert_eq!(
            build_member(&spec, 3).unwrap(),
            build_member(&spec, 3).unwrap()
        );
    }

    #[test]
    fn pure_set_member() {
        let m = build_member(&FamilySpec::pure_set(10), 7).unwrap();
        assert_eq!(m.size(), 7);
        assert!(m.relations().values().all(RelationTable::is_empty));
    }

    #[test]
    fn bipartite_generalizes_k23() {
        let spec = FamilySpec::bipartite(3, 4, 5).unwrap();
        let m = build_member(&spec, 2).unwrap();
        assert_eq!(m.size(), 14);
        assert_eq!(m.relation_len("R"), 24);
        assert!(FamilySpec::bipartite(0, 4, 5).is_err());
    }

    #[test]
    fn out_of_domain() {
        let spec = FamilySpec::k23(5);
        assert!(matches!(
            build_member(&spec, 6),
            Err(StructureError::IndexOutOfDomain { index: 6, .. })
        ));
        assert!(build_member(&spec, 0).is_err());
    }

    #[test]
    fn validation_reports_violations() {
        let sig = Signature::k23();
        let m = build_member(&FamilySpec::k23(3), 1).unwrap();
        assert!(validate_structure(&m, &sig).is_empty());

        let mut relations = m.relations().clone();
        relations.insert("R".into(), RelationTable::new(2, [vec![5, 0]]));
        let bad = FiniteStructure::from_parts(5, relations.clone(), BTreeMap::new());
        let v = validate_structure(&bad, &sig);
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("index 5 out of range"), "{v:?}");

        relations.insert("S".into(), RelationTable::new(1, [vec![0]]));
        let bad = FiniteStructure::from_parts(5, relations, BTreeMap::new());
        assert!(validate_structure(&bad, &sig)
            .iter()
            .any(|v| v.contains("`S` is not declared")));

        let sig_c = Signature::new(sig.relations().to_vec(), vec!["c".into()]).unwrap();
        assert!(validate_structure(&m, &sig_c)
            .iter()
            .any(|v| v.contains("`c` is not mapped")));
    }

    #[test]
    fn k23_axiom_checks() {
        let sig = Signature::k23();
        let m = build_member(&FamilySpec::k23(5), 3).unwrap();
        let parse = |s: &str| crate::logic::parse_formula(s, &sig).unwrap();
        let res = check_axioms(
            &m,
            &[
                parse(K23_AXIOMS[2]),
                parse(K23_AXIOMS[3]),
                parse("exists x. P0(x) & P1(x)"),
            ],
        )
        .unwrap();
        assert_eq!(res, [true, true, false]);
        assert!(matches!(
            check_axioms(&m, &[parse("P0(x)")]),
            Err(StructureError::NotASentence(_))
        ));
    }

    #[test]
    fn axioms_detect_a_broken_copy() {
        let sig = Signature::k23();
        let m = build_member(&FamilySpec::k23(3), 2).unwrap();
        let mut relations = m.relations().clone();
        let edges: Vec<Vec<usize>> = m
            .relation("R")
            .unwrap()
            .tuples()
            .filter(|t| **t != vec![0, 2])
            .cloned()
            .collect();
        relations.insert("R".into(), RelationTable::new(2, edges));
        let broken = FiniteStructure::from_parts(10, relations, BTreeMap::new());
        assert!(validate_structure(&broken, &sig).is_empty());
        let res = check_axioms(&broken, &k23_axioms()).unwrap();
        assert_eq!(res, [true, true, false, false, false]);
    }

    #[test]
    fn family_json() {
        let text = r#"{"signature":{"relations":[{"name":"P0","arity":1},{"name":"P1","arity":1},{"name":"R","arity":2}]},
                       "generator":{"kind":"k23"},"index_domain":[1,12]}"#;
        let spec = FamilySpec::from_json(text).unwrap();
        assert_eq!(spec, FamilySpec::k23(12));

        let text = r#"{"signature":{"relations":[{"name":"P0","arity":1},{"name":"P1","arity":1},{"name":"R","arity":2}]},
                       "generator":{"kind":"bipartite","params":{"p":1,"q":2}},"index_domain":[1,4]}"#;
        assert!(FamilySpec::from_json(text).is_ok());

        let unknown = r#"{"signature":{"relations":[]},"generator":{"kind":"pure_set"},"index_domain":[1,3],"extra":1}"#;
        assert!(FamilySpec::from_json(unknown).is_err());
        let unknown_gen = r#"{"signature":{"relations":[]},"generator":{"kind":"pure_set","seed":3},"index_domain":[1,3]}"#;
        assert!(FamilySpec::from_json(unknown_gen).is_err());
        let bad_kind =
            r#"{"signature":{"relations":[]},"generator":{"kind":"random"},"index_domain":[1,3]}"#;
        assert!(FamilySpec::from_json(bad_kind).is_err());
        let k23_missing_rel =
            r#"{"signature":{"relations":[]},"generator":{"kind":"k23"},"index_domain":[1,3]}"#;
        assert!(FamilySpec::from_json(k23_missing_rel).is_err());
    }

    #[test]
    fn table_family() {
        let text = r#"{"signature":{"relations":[{"name":"Q","arity":1}],"constants":["c"]},
            "generator":{"kind":"table","members":{
                "1":{"size":1,"relations":{"Q":[[0]]},"constants":{"c":0}},
                "2":{"size":2,"relations":{"Q":[]},"constants":{"c":1}}}},
            "index_domain":[1,2]}"#;
        let spec = FamilySpec::from_json(text).unwrap();
        let m = build_member(&spec, 2).unwrap();
        assert_eq!(m.size(), 2);
        assert_eq!(m.constant("c"), Some(1));
        assert_eq!(spec.default_indices(), [1, 2]);

        let bad = text.replace(r#""constants":{"c":1}"#, r#""constants":{"c":7}"#);
        let spec = FamilySpec::from_json(&bad).unwrap();
        assert!(matches!(
            build_member(&spec, 2),
            Err(StructureError::InvalidMember { index: 2, .. })
        ));

        let missing = text.replace(r#""index_domain":[1,2]"#, r#""index_domain":[1,3]"#);
        assert!(FamilySpec::from_json(&missing).is_err());
    }

    #[test]
    fn table_cap() {
        let members: BTreeMap<String, TableMember> = [(
            "1".to_string(),
            TableMember {
                size: 3,
                relations: [("Q".to_string(), vec![vec![0], vec![1], vec![2]])].into(),
                constants: BTreeMap::new(),
            },
        )]
        .into();
        let sig = Signature::relational([("Q", 1)]).unwrap();
        let gen = Generator::Table { members };
        assert!(matches!(
            FamilySpec::with_table_cap(sig.clone(), gen.clone(), [1, 1], 2),
            Err(StructureError::TooLarge { found: 3, cap: 2 })
        ));
        assert!(FamilySpec::with_table_cap(sig, gen, [1, 1], 3).is_ok());
    }
}
