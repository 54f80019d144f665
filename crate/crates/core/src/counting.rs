//! Tarski evaluation over finite structures and exact counting of definable
//! sets.
//!
//! Formulas are compiled once per structure into an arena of nodes whose
//! variables are environment slots. Closed subformulas (no free slots) are
//! memoized per [`Evaluator`], so a sentence nested under quantifiers is
//! evaluated once.

use std::cell::RefCell;
use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::logic::{Formula, Term, VariablePartition};
use crate::structures::{FiniteStructure, Lookup};

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Variable name to universe element.
pub type Assignment = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountingError {
    #[error("free variable `{0}` has no value")]
    Unassigned(String),
    #[error("variable `{0}` is assigned but does not belong here")]
    Unexpected(String),
    #[error("element {element} assigned to `{var}` is outside a universe of size {size}")]
    OutOfRange {
        var: String,
        element: usize,
        size: usize,
    },
    #[error("relation `{0}` is not interpreted in the structure")]
    UninterpretedRelation(String),
    #[error("constant `{0}` is not interpreted in the structure")]
    UninterpretedConstant(String),
    #[error("partition mismatch: {0}")]
    Partition(#[from] crate::logic::PartitionError),
    #[error("enumeration of {required} tuples exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Var(usize),
    Elem(usize),
}

#[derive(Debug)]
enum Node {
    True,
    False,
    Rel { table: usize, args: Vec<Slot> },
    Eq(Slot, Slot),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Iff(usize, usize),
    Exists(usize, usize),
    ForAll(usize, usize),
}

/// A formula compiled against one structure.
pub struct Evaluator<'s> {
    size: usize,
    tables: Vec<&'s Lookup>,
    nodes: Vec<Node>,
    closed: Vec<bool>,
    memo: RefCell<Vec<Option<bool>>>,
    root: usize,
    free: Vec<String>,
    slot_count: usize,
}

struct Compiler<'s> {
    structure: &'s FiniteStructure,
    table_names: Vec<String>,
    tables: Vec<&'s Lookup>,
    nodes: Vec<Node>,
    closed: Vec<bool>,
    scope: Vec<(String, usize)>,
    slot_count: usize,
}

impl<'s> Compiler<'s> {
    fn slot(&self, t: &Term) -> Result<Slot, CountingError> {
        match t {
            Term::Var(v) => self
                .scope
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|&(_, s)| Slot::Var(s))
                .ok_or_else(|| CountingError::Unassigned(v.clone())),
            Term::Const(c) => self
                .structure
                .constant(c)
                .map(Slot::Elem)
                .ok_or_else(|| CountingError::UninterpretedConstant(c.clone())),
        }
    }

    fn push(&mut self, node: Node, closed: bool) -> usize {
        self.nodes.push(node);
        self.closed.push(closed);
        self.nodes.len() - 1
    }

    /// Returns the node id and the sorted free slots used below it.
    fn compile(&mut self, f: &Formula) -> Result<(usize, Vec<usize>), CountingError> {
        let var_slots = |s: &[Slot]| {
            let mut v: Vec<usize> = s
                .iter()
                .filter_map(|s| match s {
                    Slot::Var(v) => Some(*v),
                    Slot::Elem(_) => None,
                })
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let (node, used) = match f {
            Formula::True => (Node::True, Vec::new()),
            Formula::False => (Node::False, Vec::new()),
            Formula::Atom { relation, args } => {
                let table = match self.table_names.iter().position(|n| n == relation) {
                    Some(t) => t,
                    None => {
                        let t = self.structure.relation(relation).ok_or_else(|| {
                            CountingError::UninterpretedRelation(relation.clone())
                        })?;
                        self.table_names.push(relation.clone());
                        self.tables.push(t.lookup(self.structure.size()));
                        self.tables.len() - 1
                    }
                };
                let args = args
                    .iter()
                    .map(|t| self.slot(t))
                    .collect::<Result<Vec<_>, _>>()?;
                let used = var_slots(&args);
                (Node::Rel { table, args }, used)
            }
            Formula::Eq(a, b) => {
                let (a, b) = (self.slot(a)?, self.slot(b)?);
                (Node::Eq(a, b), var_slots(&[a, b]))
            }
            Formula::Not(g) => {
                let (g, used) = self.compile(g)?;
                (Node::Not(g), used)
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                let (a_id, mut used) = self.compile(a)?;
                let (b_id, ub) = self.compile(b)?;
                used.extend(ub);
                used.sort_unstable();
                used.dedup();
                let node = match f {
                    Formula::And(..) => Node::And(a_id, b_id),
                    Formula::Or(..) => Node::Or(a_id, b_id),
                    Formula::Implies(..) => Node::Implies(a_id, b_id),
                    _ => Node::Iff(a_id, b_id),
                };
                (node, used)
            }
            Formula::Exists(v, g) | Formula::ForAll(v, g) => {
                let slot = self.slot_count;
                self.slot_count += 1;
                self.scope.push((v.clone(), slot));
                let (body, mut used) = self.compile(g)?;
                self.scope.pop();
                used.retain(|&u| u != slot);
                let node = if matches!(f, Formula::Exists(..)) {
                    Node::Exists(slot, body)
                } else {
                    Node::ForAll(slot, body)
                };
                (node, used)
            }
        };
        let closed = used.is_empty();
        Ok((self.push(node, closed), used))
    }
}

impl<'s> Evaluator<'s> {
    /// Compiles `f` with its free variables in slots `0..k`, in the order
    /// given by `free` (which must contain every free variable of `f`).
    pub fn with_free_order(
        s: &'s FiniteStructure,
        f: &Formula,
        free: &[String],
    ) -> Result<Self, CountingError> {
        let mut c = Compiler {
            structure: s,
            table_names: Vec::new(),
            tables: Vec::new(),
            nodes: Vec::new(),
            closed: Vec::new(),
            scope: free.iter().cloned().zip(0..).collect(),
            slot_count: free.len(),
        };
        let (root, _) = c.compile(f)?;
        let n = c.nodes.len();
        Ok(Evaluator {
            size: s.size(),
            tables: c.tables,
            nodes: c.nodes,
            closed: c.closed,
            memo: RefCell::new(vec![None; n]),
            root,
            free: free.to_vec(),
            slot_count: c.slot_count,
        })
    }

    pub fn new(s: &'s FiniteStructure, f: &Formula) -> Result<Self, CountingError> {
        Evaluator::with_free_order(s, f, &f.free_variables())
    }

    pub fn free_variables(&self) -> &[String] {
        &self.free
    }

    /// Fresh environment; free slots must be filled before [`Self::eval`].
    pub fn environment(&self) -> Vec<usize> {
        vec![0; self.slot_count]
    }

    pub fn eval(&self, env: &mut [usize]) -> bool {
        self.node(self.root, env)
    }

    fn value(&self, s: Slot, env: &[usize]) -> usize {
        match s {
            Slot::Var(v) => env[v],
            Slot::Elem(e) => e,
        }
    }

    fn node(&self, id: usize, env: &mut [usize]) -> bool {
        if self.closed[id] {
            if let Some(v) = self.memo.borrow()[id] {
                return v;
            }
            let v = self.node_uncached(id, env);
            self.memo.borrow_mut()[id] = Some(v);
            return v;
        }
        self.node_uncached(id, env)
    }

    fn node_uncached(&self, id: usize, env: &mut [usize]) -> bool {
        match &self.nodes[id] {
            Node::True => true,
            Node::False => false,
            Node::Rel { table, args } => match self.tables[*table] {
                Lookup::Dense(bits) => {
                    let mut idx = 0usize;
                    for a in args.iter().rev() {
                        idx = idx * self.size + self.value(*a, env);
                    }
                    bits[idx / 64] >> (idx % 64) & 1 == 1
                }
                Lookup::Sparse(set) => {
                    let t: Vec<usize> = args.iter().map(|a| self.value(*a, env)).collect();
                    set.contains(&t)
                }
            },
            Node::Eq(a, b) => self.value(*a, env) == self.value(*b, env),
            Node::Not(g) => !self.node(*g, env),
            Node::And(a, b) => self.node(*a, env) && self.node(*b, env),
            Node::Or(a, b) => self.node(*a, env) || self.node(*b, env),
            Node::Implies(a, b) => !self.node(*a, env) || self.node(*b, env),
            Node::Iff(a, b) => self.node(*a, env) == self.node(*b, env),
            Node::Exists(slot, body) => (0..self.size).any(|e| {
                env[*slot] = e;
                self.node(*body, env)
            }),
            Node::ForAll(slot, body) => (0..self.size).all(|e| {
                env[*slot] = e;
                self.node(*body, env)
            }),
        }
    }
}

fn check_assignment(
    s: &FiniteStructure,
    a: &Assignment,
    expected: impl Iterator<Item = String>,
) -> Result<(), CountingError> {
    let expected: Vec<String> = expected.collect();
    for v in &expected {
        match a.get(v) {
            None => return Err(CountingError::Unassigned(v.clone())),
            Some(&e) if e >= s.size() => {
                return Err(CountingError::OutOfRange {
                    var: v.clone(),
                    element: e,
                    size: s.size(),
                })
            }
            Some(_) => {}
        }
    }
    if let Some(extra) = a.keys().find(|k| !expected.contains(k)) {
        return Err(CountingError::Unexpected(extra.clone()));
    }
    Ok(())
}

/// Whether `s` satisfies `f` under `a`; `a` must assign exactly the free
/// variables of `f`.
pub fn evaluate(s: &FiniteStructure, f: &Formula, a: &Assignment) -> Result<bool, CountingError> {
    let ev = Evaluator::new(s, f)?;
    check_assignment(s, a, ev.free_variables().iter().cloned())?;
    let mut env = ev.environment();
    for (i, v) in ev.free_variables().iter().enumerate() {
        env[i] = a[v];
    }
    Ok(ev.eval(&mut env))
}

/// Calls `visit` on every tuple of `{0..size}^len` in lexicographic order.
pub(crate) fn for_each_tuple(size: usize, len: usize, mut visit: impl FnMut(&[usize])) {
    let mut t = vec![0usize; len];
    if len > 0 && size == 0 {
        return;
    }
    loop {
        visit(&t);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < size {
                break;
            }
            t[i] = 0;
        }
    }
}

pub(crate) fn check_budget(size: usize, vars: usize, budget: u64) -> Result<(), CountingError> {
    let required = (size as u128).checked_pow(vars as u32).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(CountingError::BudgetExceeded { required, budget });
    }
    Ok(())
}

/// Prepared counting context: the formula compiled with object variables in
/// slots first, then parameter variables, then fixed outer variables.
struct Counter<'s> {
    ev: Evaluator<'s>,
    n_object: usize,
    n_param: usize,
    env: Vec<usize>,
}

impl<'s> Counter<'s> {
    fn new(
        s: &'s FiniteStructure,
        f: &Formula,
        part: &VariablePartition,
        outer: &Assignment,
        budget: u64,
    ) -> Result<Self, CountingError> {
        let mut order = part.combined();
        let outer_vars: Vec<String> = outer.keys().cloned().collect();
        for v in &outer_vars {
            if order.contains(v) {
                return Err(CountingError::Unexpected(v.clone()));
            }
        }
        let free = f.free_variables();
        let rest: Vec<String> = free
            .iter()
            .filter(|v| !order.contains(v))
            .cloned()
            .collect();
        check_assignment(s, outer, rest.iter().cloned())?;
        order.extend(rest.iter().cloned());
        check_budget(
            s.size(),
            part.object().len() + part.parameter().len(),
            budget,
        )?;
        let ev = Evaluator::with_free_order(s, f, &order)?;
        let mut env = ev.environment();
        let base = part.object().len() + part.parameter().len();
        for (i, v) in rest.iter().enumerate() {
            env[base + i] = outer[v];
        }
        Ok(Counter {
            ev,
            n_object: part.object().len(),
            n_param: part.parameter().len(),
            env,
        })
    }

    fn set_params(&mut self, params: &[usize]) {
        self.env[self.n_object..self.n_object + self.n_param].copy_from_slice(params);
    }

    fn count_objects(&mut self) -> u64 {
        let Counter {
            ev, n_object, env, ..
        } = self;
        let mut count = 0u64;
        let size = ev.size;
        for_each_tuple(size, *n_object, |t| {
            env[..t.len()].copy_from_slice(t);
            if ev.eval(env) {
                count += 1;
            }
        });
        count
    }
}

/// `|{ā : s ⊨ f(ā, params)}|`. `params` assigns every free variable that is
/// not an object variable; object variables need not occur in `f`.
pub fn count_solutions(
    s: &FiniteStructure,
    f: &Formula,
    part: &VariablePartition,
    params: &Assignment,
) -> Result<u64, CountingError> {
    count_solutions_with_budget(s, f, part, params, DEFAULT_BUDGET)
}

pub fn count_solutions_with_budget(
    s: &FiniteStructure,
    f: &Formula,
    part: &VariablePartition,
    params: &Assignment,
    budget: u64,
) -> Result<u64, CountingError> {
    let object = VariablePartition::new(part.object().to_vec(), Vec::new())?;
    for v in part.parameter() {
        if !params.contains_key(v) {
            return Err(CountingError::Unassigned(v.clone()));
        }
    }
    let mut c = Counter::new(s, f, &object, params, budget)?;
    Ok(c.count_objects())
}

/// One fiber cardinality and the parameter tuples realizing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberClass {
    pub cardinality: u64,
    /// Lexicographically sorted.
    pub members: Vec<Vec<usize>>,
}

impl FiberClass {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn witness(&self) -> Option<&[usize]> {
        self.members.first().map(Vec::as_slice)
    }
}

/// Parameter tuples grouped by the size of their fiber, largest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberSpectrum {
    pub entries: Vec<FiberClass>,
    pub total_pairs: u64,
}

impl FiberSpectrum {
    /// `Σ cardinality · |class|`, recomputed from the entries.
    pub fn weighted_sum(&self) -> u128 {
        self.entries
            .iter()
            .map(|e| e.cardinality as u128 * e.members.len() as u128)
            .sum()
    }

    pub fn parameter_tuple_count(&self) -> usize {
        self.entries.iter().map(FiberClass::len).sum()
    }
}

pub fn fiber_spectrum(
    s: &FiniteStructure,
    f: &Formula,
    part: &VariablePartition,
    outer: &Assignment,
) -> Result<FiberSpectrum, CountingError> {
    fiber_spectrum_with_budget(s, f, part, outer, DEFAULT_BUDGET)
}

pub fn fiber_spectrum_with_budget(
    s: &FiniteStructure,
    f: &Formula,
    part: &VariablePartition,
    outer: &Assignment,
    budget: u64,
) -> Result<FiberSpectrum, CountingError> {
    let mut c = Counter::new(s, f, part, outer, budget)?;
    let mut classes: BTreeMap<u64, Vec<Vec<usize>>> = BTreeMap::new();
    let n_param = c.n_param;
    for_each_tuple(s.size(), n_param, |b| {
        c.set_params(b);
        let k = c.count_objects();
        classes.entry(k).or_default().push(b.to_vec());
    });
    let entries: Vec<FiberClass> = classes
        .into_iter()
        .rev()
        .map(|(cardinality, members)| FiberClass {
            cardinality,
            members,
        })
        .collect();
    let total_pairs = entries
        .iter()
        .map(|e| e.cardinality * e.members.len() as u64)
        .sum();
    Ok(FiberSpectrum {
        entries,
        total_pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SumIdentityCheck {
    pub holds: bool,
    /// Direct count over object and parameter variables together.
    pub combined_count: u64,
    /// `Σ A_i · |Z_i|` from the spectrum.
    pub spectrum_sum: u128,
}

/// Checks `|φ(M^{x̄ȳ})| = Σ A_i·|Z_i|` against a direct enumeration of the
/// combined tuple space.
pub fn verify_sum_identity(
    spectrum: &FiberSpectrum,
    s: &FiniteStructure,
    f: &Formula,
    part: &VariablePartition,
    outer: &Assignment,
) -> Result<SumIdentityCheck, CountingError> {
    let combined = VariablePartition::new(part.combined(), Vec::new())?;
    let combined_count = count_solutions(s, f, &combined, outer)?;
    let spectrum_sum = spectrum.weighted_sum();
    Ok(SumIdentityCheck {
        holds: combined_count as u128 == spectrum_sum,
        combined_count,
        spectrum_sum,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuotientIdentityCheck {
    pub applicable: bool,
    pub holds: bool,
    /// The common size of every nonempty fiber `φ(ā, M^{ȳ})`.
    pub b: Option<u64>,
    /// `|{ā : ∃ȳ φ(ā, ȳ)}|`, counted directly.
    pub projection_count: u64,
    pub spectrum_sum: u128,
}

/// When every nonempty fiber over the object tuples has one size `B`, checks
/// that the projection `{ā : ∃ȳ φ}` has exactly `Σ A_i·|Z_i| / B` elements.
pub fn verify_quotient_identity(
    s: &FiniteStructure,
    f: &Formula,
    part: &VariablePartition,
    outer: &Assignment,
) -> Result<QuotientIdentityCheck, CountingError> {
    let spectrum = fiber_spectrum(s, f, part, outer)?;
    let swapped = fiber_spectrum(s, f, &part.swapped(), outer)?;
    let projected = Formula::exists_all(part.parameter().to_vec(), f.clone());
    let object_only = VariablePartition::new(part.object().to_vec(), Vec::new())?;
    let projection_count = count_solutions(s, &projected, &object_only, outer)?;
    let spectrum_sum = spectrum.weighted_sum();

    let nonempty: Vec<u64> = swapped
        .entries
        .iter()
        .map(|e| e.cardinality)
        .filter(|&c| c > 0)
        .collect();
    let b = match nonempty.as_slice() {
        [b] => Some(*b),
        _ => None,
    };
    let holds = b.is_some_and(|b| {
        spectrum_sum % b as u128 == 0 && spectrum_sum / b as u128 == projection_count as u128
    });
    Ok(QuotientIdentityCheck {
        applicable: b.is_some(),
        holds,
        b,
        projection_count,
        spectrum_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, Signature};
    use crate::structures::{build_member, FamilySpec, RelationTable};

    fn k23(n: u64) -> FiniteStructure {
        build_member(&FamilySpec::k23(20), n).unwrap()
    }

    fn f(s: &str) -> Formula {
        parse_formula(s, &Signature::k23()).unwrap()
    }

    fn assign(pairs: &[(&str, usize)]) -> Assignment {
        pairs.iter().map(|&(v, e)| (v.to_string(), e)).collect()
    }

    fn part(o: &[&str], p: &[&str]) -> VariablePartition {
        VariablePartition::new(o.iter().copied(), p.iter().copied()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let m = k23(1);
        assert!(evaluate(&m, &f("R(x,y)"), &assign(&[("x", 0), ("y", 2)])).unwrap());
        assert!(!evaluate(&m, &f("R(x,y)"), &assign(&[("x", 2), ("y", 0)])).unwrap());
        for x in 0..5 {
            assert!(evaluate(&m, &f("x = x"), &assign(&[("x", x)])).unwrap());
            assert!(!evaluate(&m, &f("P0(x) & P1(x)"), &assign(&[("x", x)])).unwrap());
        }
    }

    #[test]
    fn evaluate_rejects_bad_assignments() {
        let m = k23(1);
        assert_eq!(
            evaluate(&m, &f("R(x,y)"), &assign(&[("x", 0)])),
            Err(CountingError::Unassigned("y".into()))
        );
        assert!(matches!(
            evaluate(&m, &f("P0(x)"), &assign(&[("x", 9)])),
            Err(CountingError::OutOfRange { .. })
        ));
        assert!(matches!(
            evaluate(&m, &f("P0(x)"), &assign(&[("x", 0), ("z", 1)])),
            Err(CountingError::Unexpected(_))
        ));
    }

    #[test]
    fn count_examples() {
        let m = k23(2);
        let none = Assignment::new();
        assert_eq!(
            count_solutions(&m, &f("P1(x)"), &part(&["x"], &[]), &none).unwrap(),
            6
        );
        assert_eq!(
            count_solutions(
                &m,
                &f("R(x,y)"),
                &part(&["x"], &["y"]),
                &assign(&[("y", 2)])
            )
            .unwrap(),
            2
        );
        assert_eq!(
            count_solutions(&m, &f("P0(x) & !P0(x)"), &part(&["x"], &[]), &none).unwrap(),
            0
        );
        // vacuous object variable
        assert_eq!(
            count_solutions(&m, &f("P0(x)"), &part(&["x", "z"], &[]), &none).unwrap(),
            40
        );
    }

    #[test]
    fn count_requires_parameter_values() {
        let m = k23(1);
        assert_eq!(
            count_solutions(&m, &f("R(x,y)"), &part(&["x"], &["y"]), &Assignment::new()),
            Err(CountingError::Unassigned("y".into()))
        );
        assert!(count_solutions(&m, &f("R(x,y)"), &part(&["x"], &[]), &Assignment::new()).is_err());
    }

    #[test]
    fn spectrum_of_r_over_targets() {
        let m = k23(3);
        let sp =
            fiber_spectrum(&m, &f("R(x,y)"), &part(&["x"], &["y"]), &Assignment::new()).unwrap();
        assert_eq!(sp.entries.len(), 2);
        assert_eq!(sp.entries[0].cardinality, 2);
        let p1: Vec<Vec<usize>> = m.relation("P1").unwrap().tuples().cloned().collect();
        assert_eq!(sp.entries[0].members, p1);
        assert_eq!(sp.entries[1].cardinality, 0);
        assert_eq!(sp.entries[1].len(), 6);
        assert_eq!(sp.total_pairs, 18);
    }

    #[test]
    fn spectrum_of_r_over_sources() {
        let m = k23(3);
        let sp =
            fiber_spectrum(&m, &f("R(x,y)"), &part(&["y"], &["x"]), &Assignment::new()).unwrap();
        let p0: Vec<Vec<usize>> = m.relation("P0").unwrap().tuples().cloned().collect();
        assert_eq!(sp.entries[0].cardinality, 3);
        assert_eq!(sp.entries[0].members, p0);
        assert_eq!((sp.entries[1].cardinality, sp.entries[1].len()), (0, 9));
    }

    #[test]
    fn spectrum_without_parameters() {
        let m = k23(2);
        let sp = fiber_spectrum(&m, &f("P0(x)"), &part(&["x"], &[]), &Assignment::new()).unwrap();
        assert_eq!(
            sp.entries,
            [FiberClass {
                cardinality: 4,
                members: vec![vec![]]
            }]
        );
    }

    #[test]
    fn spectrum_with_outer_parameter() {
        let m = k23(2);
        let g = f("R(x,y) & R(x,z)");
        let sp = fiber_spectrum(&m, &g, &part(&["x"], &["y"]), &assign(&[("z", 2)])).unwrap();
        // y in the same copy as target 2 shares both sources.
        assert_eq!(sp.entries[0].cardinality, 2);
        assert_eq!(sp.entries[0].members, [[2], [3], [4]]);
        assert!(fiber_spectrum(&m, &g, &part(&["x"], &["y"]), &Assignment::new()).is_err());
    }

    #[test]
    fn sum_identity_examples() {
        let m = k23(3);
        let g = f("R(x,y)");
        let p = part(&["x"], &["y"]);
        let sp = fiber_spectrum(&m, &g, &p, &Assignment::new()).unwrap();
        let check = verify_sum_identity(&sp, &m, &g, &p, &Assignment::new()).unwrap();
        assert_eq!(
            check,
            SumIdentityCheck {
                holds: true,
                combined_count: 18,
                spectrum_sum: 18
            }
        );

        let sig = Signature::relational([("E", 2)]).unwrap();
        let empty = crate::structures::FiniteStructure::empty(&sig, 4);
        let e = parse_formula("E(x,y)", &sig).unwrap();
        let sp = fiber_spectrum(&empty, &e, &p, &Assignment::new()).unwrap();
        let check = verify_sum_identity(&sp, &empty, &e, &p, &Assignment::new()).unwrap();
        assert!(check.holds);
        assert_eq!(check.combined_count, 0);
    }

    #[test]
    fn sum_identity_detects_a_corrupted_spectrum() {
        let m = k23(2);
        let g = f("R(x,y)");
        let p = part(&["x"], &["y"]);
        let mut sp = fiber_spectrum(&m, &g, &p, &Assignment::new()).unwrap();
        sp.entries[0].cardinality += 1;
        let check = verify_sum_identity(&sp, &m, &g, &p, &Assignment::new()).unwrap();
        assert!(!check.holds);
        assert_eq!((check.combined_count, check.spectrum_sum), (12, 18));
    }

    #[test]
    fn quotient_identity_examples() {
        let m = k23(2);
        let q =
            verify_quotient_identity(&m, &f("R(x,y)"), &part(&["x"], &["y"]), &Assignment::new())
                .unwrap();
        assert_eq!(
            q,
            QuotientIdentityCheck {
                applicable: true,
                holds: true,
                b: Some(3),
                projection_count: 4,
                spectrum_sum: 12
            }
        );

        // mixed nonzero fiber sizes
        let sig = Signature::relational([("E", 2)]).unwrap();
        let mut s = crate::structures::FiniteStructure::empty(&sig, 3);
        let mut rel = s.relations().clone();
        rel.insert(
            "E".into(),
            RelationTable::new(2, [vec![0, 1], vec![0, 2], vec![1, 2]]),
        );
        s = crate::structures::FiniteStructure::from_parts(3, rel, Default::default());
        let e = parse_formula("E(x,y)", &sig).unwrap();
        let q =
            verify_quotient_identity(&s, &e, &part(&["x"], &["y"]), &Assignment::new()).unwrap();
        assert!(!q.applicable && !q.holds);

        let empty = crate::structures::FiniteStructure::empty(&sig, 3);
        let q = verify_quotient_identity(&empty, &e, &part(&["x"], &["y"]), &Assignment::new())
            .unwrap();
        assert!(!q.applicable);
        assert_eq!(q.b, None);
    }

    #[test]
    fn budget_guard() {
        let m = k23(4);
        let err = count_solutions_with_budget(
            &m,
            &f("R(x,y)"),
            &part(&["x", "y"], &[]),
            &Assignment::new(),
            100,
        )
        .unwrap_err();
        assert_eq!(
            err,
            CountingError::BudgetExceeded {
                required: 400,
                budget: 100
            }
        );
    }

    #[test]
    fn closed_subformulas_are_memoized_consistently() {
        let m = k23(3);
        let g = f("P0(x) & (exists y. exists z. R(y,z) & P1(z))");
        let n = count_solutions(&m, &g, &part(&["x"], &[]), &Assignment::new()).unwrap();
        assert_eq!(n, 6);
        let g = f("P0(x) & (forall y. P0(y))");
        assert_eq!(
            count_solutions(&m, &g, &part(&["x"], &[]), &Assignment::new()).unwrap(),
            0
        );
    }

    #[test]
    fn tuple_enumeration_is_lexicographic() {
        let mut seen = Vec::new();
        for_each_tuple(2, 2, |t| seen.push(t.to_vec()));
        assert_eq!(seen, [[0, 0], [0, 1], [1, 0], [1, 1]]);
        let mut n = 0;
        for_each_tuple(3, 0, |_| n += 1);
        assert_eq!(n, 1);
        for_each_tuple(0, 1, |_| n += 1);
        assert_eq!(n, 1);
    }
}
