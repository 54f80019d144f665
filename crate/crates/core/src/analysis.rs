//! Family-level analyses: counting polynomials in the size of a selected set,
//! class stability, asymptotic-class certification, zero-one stabilization
//! and empirical bounds on finite fiber sizes.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::counting::{self, fiber_spectrum_with_budget, Assignment, CountingError, Evaluator};
use crate::logic::{parse_formula, Formula, ParseError, Signature, Term, VariablePartition};
use crate::polynomials::{
    composed_leading, integer, interpolate, rational_power, serialize_opt_rational, to_f64,
    InterpolationError, PolyError, RationalPolynomial,
};
use crate::structures::{build_member, FamilySpec, FiniteStructure, StructureError};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Counting(#[from] CountingError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("invalid q-selector: {0}")]
    Selector(String),
    #[error("selector parameters unsatisfiable in member {index}")]
    KappaUnsatisfiable { index: u64 },
    #[error("selected set is empty in member {index}")]
    EmptySelectedSet { index: u64 },
    #[error("need at least {needed} sampled indices, got {got}")]
    TooFewIndices { needed: usize, got: usize },
    #[error("{0} is not a sentence")]
    NotASentence(String),
    #[error("formulas must only use the variables {vars:?}; `{formula}` does not")]
    ArityMismatch { formula: String, vars: Vec<String> },
    #[error("claimed dimension {claimed} but the fitted universe polynomial has degree {fitted}")]
    DegreeMismatch { claimed: usize, fitted: String },
    #[error("counts are not polynomial in q: {0}")]
    NotPolynomial(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Enumeration budget and worker count shared by all analyses.
#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub budget: u64,
    /// `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            budget: counting::DEFAULT_BUDGET,
            jobs: None,
        }
    }
}

/// Runs `work` on every sampled member, in parallel, returning results in
/// index order.
fn per_member<T, F>(
    spec: &FamilySpec,
    indices: &[u64],
    opts: &AnalysisOptions,
    work: F,
) -> Result<Vec<T>, AnalysisError>
where
    T: Send,
    F: Fn(u64, &FiniteStructure) -> Result<T, AnalysisError> + Sync,
{
    let (lo, hi) = spec.index_domain();
    if let Some(&bad) = indices.iter().find(|&&i| i < lo || i > hi) {
        return Err(StructureError::IndexOutOfDomain { index: bad, lo, hi }.into());
    }
    let run = || {
        indices
            .par_iter()
            .map(|&i| {
                let m = build_member(spec, i)?;
                work(i, &m)
            })
            .collect::<Result<Vec<T>, AnalysisError>>()
    };
    match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| AnalysisError::Pool(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Chooses the set `θ(M, d̄)` whose size `q` parameterizes the counts: `d̄` is
/// the lexicographically least tuple satisfying `κ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSelector {
    theta: Formula,
    kappa: Formula,
    object_var: String,
    parameter_vars: Vec<String>,
}

impl QSelector {
    /// The object variable of `theta` is `v` when free, otherwise its only
    /// free variable not constrained by `kappa`. The remaining free variables
    /// of both formulas are the parameters.
    pub fn new(theta: Formula, kappa: Option<Formula>) -> Result<Self, AnalysisError> {
        let kappa = kappa.unwrap_or(Formula::True);
        let theta_free = theta.free_variables();
        let kappa_free = kappa.free_variables();
        let object_var = if theta_free.iter().any(|v| v == "v") {
            "v".to_string()
        } else {
            let candidates: Vec<&String> = theta_free
                .iter()
                .filter(|v| !kappa_free.contains(v))
                .collect();
            match candidates.as_slice() {
                [v] => (*v).clone(),
                _ => {
                    return Err(AnalysisError::Selector(format!(
                        "cannot tell the object variable of `{theta}`; name it `v`"
                    )))
                }
            }
        };
        if kappa_free.contains(&object_var) {
            return Err(AnalysisError::Selector(format!(
                "`{object_var}` is the object variable and cannot occur free in kappa"
            )));
        }
        let mut parameter_vars: Vec<String> = theta_free
            .iter()
            .filter(|v| **v != object_var)
            .cloned()
            .collect();
        for v in kappa_free {
            if !parameter_vars.contains(&v) {
                parameter_vars.push(v);
            }
        }
        Ok(QSelector {
            theta,
            kappa,
            object_var,
            parameter_vars,
        })
    }

    /// `THETA` or `THETA;KAPPA`.
    pub fn parse(text: &str, sig: &Signature) -> Result<Self, AnalysisError> {
        let (theta, kappa) = match text.split_once(';') {
            Some((t, k)) => (t, Some(parse_formula(k, sig)?)),
            None => (text, None),
        };
        QSelector::new(parse_formula(theta, sig)?, kappa)
    }

    pub fn theta(&self) -> &Formula {
        &self.theta
    }

    pub fn kappa(&self) -> &Formula {
        &self.kappa
    }

    pub fn object_var(&self) -> &str {
        &self.object_var
    }

    pub fn parameter_vars(&self) -> &[String] {
        &self.parameter_vars
    }

    pub fn describe(&self) -> String {
        if self.kappa == Formula::True {
            self.theta.to_string()
        } else {
            format!("{};{}", self.theta, self.kappa)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QSelection {
    pub parameters: Vec<usize>,
    pub q: u64,
}

/// Least `d̄` with `κ(d̄)`, and `q = |θ(M, d̄)|`.
pub fn select_q_parameters(
    member: &FiniteStructure,
    sel: &QSelector,
    budget: u64,
) -> Result<Option<QSelection>, AnalysisError> {
    let k = sel.parameter_vars.len();
    counting::check_budget(member.size(), k, budget)?;
    let kappa = Evaluator::with_free_order(member, &sel.kappa, &sel.parameter_vars)?;
    let mut env = kappa.environment();
    let mut chosen = None;
    let mut search = |t: &[usize]| {
        if chosen.is_none() {
            env[..k].copy_from_slice(t);
            if kappa.eval(&mut env) {
                chosen = Some(t.to_vec());
            }
        }
    };
    counting::for_each_tuple(member.size(), k, &mut search);
    let Some(parameters) = chosen else {
        return Ok(None);
    };
    let theta_free = sel.theta.free_variables();
    let (names, params): (Vec<String>, Assignment) = {
        let pairs: Vec<(String, usize)> = sel
            .parameter_vars
            .iter()
            .cloned()
            .zip(parameters.iter().copied())
            .filter(|(v, _)| theta_free.contains(v))
            .collect();
        (
            pairs.iter().map(|(v, _)| v.clone()).collect(),
            pairs.into_iter().collect(),
        )
    };
    let object =
        VariablePartition::new(vec![sel.object_var.clone()], names).map_err(CountingError::from)?;
    let q = counting::count_solutions_with_budget(member, &sel.theta, &object, &params, budget)?;
    Ok(Some(QSelection { parameters, q }))
}

/// One fiber class of one member, without its full member list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
struct ClassSummary {
    cardinality: u64,
    size: usize,
    witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberSummary {
    pub index: u64,
    pub size: usize,
    pub q: u64,
    pub q_parameters: Vec<usize>,
    pub class_count: usize,
    /// Solutions over object and parameter variables together.
    pub combined_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedMember {
    pub index: u64,
    pub reason: String,
}

/// A class aligned across members and its fitted counting polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassFit {
    pub rank: usize,
    pub polynomial: Option<RationalPolynomial>,
    /// Degree of the fitted polynomial, the rank proxy; `None` for the zero
    /// polynomial or when no fit exists.
    pub degree: Option<usize>,
    pub leading_coefficient_positive: Option<bool>,
    pub held_out_verified: bool,
    pub fit_error: Option<String>,
    /// Fiber cardinality at each sampled member.
    pub counts: Vec<u64>,
    /// Number of parameter tuples in the class at each sampled member.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_sizes: Option<Vec<usize>>,
    /// Lexicographically least parameter tuple of the class per member.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<Vec<usize>>>,
}

impl ClassFit {
    pub fn is_constant(&self) -> bool {
        self.polynomial
            .as_ref()
            .is_some_and(RationalPolynomial::is_constant)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MecReport {
    pub formula: String,
    pub object_vars: Vec<String>,
    pub parameter_vars: Vec<String>,
    pub q_selector: String,
    pub sampled_indices: Vec<u64>,
    pub skipped: Vec<SkippedMember>,
    pub members: Vec<MemberSummary>,
    pub sizes_nondecreasing: bool,
    pub class_count_stable: bool,
    pub classes: Vec<ClassFit>,
    /// Every class fitted with a polynomial whose leading coefficient is
    /// positive (or which is zero).
    pub polynomial_family: bool,
    pub diagnostics: Vec<String>,
}

impl MecReport {
    /// Polynomials of the fitted classes, in rank order.
    pub fn polynomials(&self) -> Vec<Option<&RationalPolynomial>> {
        self.classes.iter().map(|c| c.polynomial.as_ref()).collect()
    }

    pub fn succeeded(&self) -> bool {
        self.class_count_stable && self.polynomial_family
    }
}

struct MemberSample {
    summary: MemberSummary,
    classes: Vec<ClassSummary>,
}

enum Sampled {
    Member(MemberSample),
    Skipped(SkippedMember),
}

fn sample_member(
    index: u64,
    m: &FiniteStructure,
    f: &Formula,
    part: &VariablePartition,
    sel: &QSelector,
    budget: u64,
) -> Result<Sampled, AnalysisError> {
    let Some(selection) = select_q_parameters(m, sel, budget)? else {
        return Ok(Sampled::Skipped(SkippedMember {
            index,
            reason: AnalysisError::KappaUnsatisfiable { index }.to_string(),
        }));
    };
    if selection.q == 0 {
        return Ok(Sampled::Skipped(SkippedMember {
            index,
            reason: AnalysisError::EmptySelectedSet { index }.to_string(),
        }));
    }
    let spectrum = fiber_spectrum_with_budget(m, f, part, &Assignment::new(), budget)?;
    let classes: Vec<ClassSummary> = spectrum
        .entries
        .iter()
        .map(|e| ClassSummary {
            cardinality: e.cardinality,
            size: e.len(),
            witness: e.witness().map(<[usize]>::to_vec).unwrap_or_default(),
        })
        .collect();
    Ok(Sampled::Member(MemberSample {
        summary: MemberSummary {
            index,
            size: m.size(),
            q: selection.q,
            q_parameters: selection.parameters,
            class_count: classes.len(),
            combined_count: spectrum.total_pairs,
        },
        classes,
    }))
}

fn check_partition_covers(f: &Formula, part: &VariablePartition) -> Result<(), AnalysisError> {
    let declared = part.combined();
    if let Some(v) = f
        .free_variables()
        .into_iter()
        .find(|v| !declared.contains(v))
    {
        return Err(CountingError::Partition(crate::logic::PartitionError::Uncovered(v)).into());
    }
    Ok(())
}

/// Fits points `(q, count)`, merging repeated `q` values.
fn fit_track(qs: &[u64], counts: &[u64]) -> Result<crate::polynomials::FitResult, String> {
    let mut points: Vec<(BigRational, BigRational)> = Vec::new();
    for (&q, &c) in qs.iter().zip(counts) {
        let (x, y) = (integer(q), integer(c));
        match points.iter().find(|(px, _)| *px == x) {
            Some((_, py)) if *py != y => {
                return Err(format!("counts {py} and {y} both occur at q = {q}"));
            }
            Some(_) => {}
            None => points.push((x, y)),
        }
    }
    if points.len() < 2 {
        return Err(InterpolationError::InsufficientPoints {
            needed: 2,
            got: points.len(),
        }
        .to_string());
    }
    let max_degree = points.len() - 2;
    interpolate(&points, max_degree).map_err(|e| e.to_string())
}

/// Computes fiber spectra over the sampled members, aligns their classes by
/// descending cardinality and fits one exact polynomial in `q` per class.
///
/// `detail` keeps per-member class sizes and witnesses in the report.
pub fn fit_counting_polynomials(
    spec: &FamilySpec,
    f: &Formula,
    part: &VariablePartition,
    sel: &QSelector,
    indices: &[u64],
    opts: &AnalysisOptions,
    detail: bool,
) -> Result<MecReport, AnalysisError> {
    check_partition_covers(f, part)?;
    let outcomes = per_member(spec, indices, opts, |i, m| {
        sample_member(i, m, f, part, sel, opts.budget)
    })?;
    let mut members = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Sampled::Member(s) => members.push(s),
            Sampled::Skipped(s) => skipped.push(s),
        }
    }
    if members.len() < 2 {
        return Err(AnalysisError::TooFewIndices {
            needed: 2,
            got: members.len(),
        });
    }
    let mut diagnostics = Vec::new();
    for s in &skipped {
        diagnostics.push(format!("member {} skipped: {}", s.index, s.reason));
    }
    let sizes_nondecreasing = members
        .windows(2)
        .all(|w| w[0].summary.size <= w[1].summary.size);
    if !sizes_nondecreasing {
        diagnostics.push("member sizes decrease along the sampled indices".into());
    }
    let class_counts: BTreeSet<usize> = members.iter().map(|m| m.classes.len()).collect();
    let class_count_stable = class_counts.len() == 1;
    let qs: Vec<u64> = members.iter().map(|m| m.summary.q).collect();

    let mut classes = Vec::new();
    if class_count_stable {
        for rank in 0..members[0].classes.len() {
            let counts: Vec<u64> = members
                .iter()
                .map(|m| m.classes[rank].cardinality)
                .collect();
            let (polynomial, held_out_verified, fit_error) = match fit_track(&qs, &counts) {
                Ok(fit) => (Some(fit.poly), fit.held_out_verified, None),
                Err(e) => {
                    diagnostics.push(format!("class {rank}: no fit: {e}"));
                    (None, false, Some(e))
                }
            };
            let leading_coefficient_positive = polynomial
                .as_ref()
                .and_then(|p| p.leading_coefficient().map(Signed::is_positive));
            if leading_coefficient_positive == Some(false) {
                diagnostics.push(format!("class {rank}: leading coefficient is not positive"));
            }
            classes.push(ClassFit {
                rank,
                degree: polynomial.as_ref().and_then(RationalPolynomial::degree),
                polynomial,
                leading_coefficient_positive,
                held_out_verified,
                fit_error,
                counts,
                class_sizes: detail.then(|| members.iter().map(|m| m.classes[rank].size).collect()),
                witnesses: detail.then(|| {
                    members
                        .iter()
                        .map(|m| m.classes[rank].witness.clone())
                        .collect()
                }),
            });
        }
    } else {
        let per: Vec<String> = members
            .iter()
            .map(|m| format!("{}:{}", m.summary.index, m.classes.len()))
            .collect();
        diagnostics.push(format!(
            "unstable class count across members (index:classes) {}",
            per.join(" ")
        ));
    }
    let polynomial_family = class_count_stable
        && classes
            .iter()
            .all(|c| c.polynomial.is_some() && c.leading_coefficient_positive != Some(false));
    Ok(MecReport {
        formula: f.to_string(),
        object_vars: part.object().to_vec(),
        parameter_vars: part.parameter().to_vec(),
        q_selector: sel.describe(),
        sampled_indices: indices.to_vec(),
        skipped,
        members: members.into_iter().map(|m| m.summary).collect(),
        sizes_nondecreasing,
        class_count_stable,
        classes,
        polynomial_family,
        diagnostics,
    })
}

/// `x = x` over a single fresh object variable.
pub fn universe_formula() -> (Formula, VariablePartition) {
    let f = Formula::Eq(Term::var("x"), Term::var("x"));
    let part = VariablePartition::new(["x"], []).expect("single variable");
    (f, part)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSample {
    pub index: u64,
    pub size: usize,
    pub count: u64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NDimEntry {
    pub rank: usize,
    pub polynomial: RationalPolynomial,
    pub mu: f64,
    #[serde(serialize_with = "serialize_opt_rational")]
    pub mu_exact: Option<BigRational>,
    pub d: usize,
    pub trace: Vec<ErrorSample>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NDimReport {
    pub n: usize,
    pub universe_polynomial: RationalPolynomial,
    pub formula: String,
    pub rel_tol: f64,
    pub entries: Vec<NDimEntry>,
    pub pass: bool,
}

/// `|count − mu·size^{d/N}| / size^{d/N}`, exact when `mu` and the root are.
fn relative_error(
    count: u64,
    size: usize,
    mu: f64,
    mu_exact: Option<&BigRational>,
    exponent: &BigRational,
) -> f64 {
    let (scale, scale_exact) = rational_power(&integer(size as u64), exponent);
    if let (Some(m), Some(s)) = (mu_exact, scale_exact) {
        if !s.is_zero() {
            let err = ((integer(count) - m * &s) / &s).abs();
            return to_f64(&err);
        }
    }
    ((count as f64) - mu * scale).abs() / scale
}

fn settles(trace: &[ErrorSample], rel_tol: f64) -> bool {
    let Some(last) = trace.last() else {
        return false;
    };
    let tail = &trace[trace.len().saturating_sub(3)..];
    last.relative_error <= rel_tol
        && tail
            .windows(2)
            .all(|w| w[1].relative_error <= w[0].relative_error)
}

/// Derives `(mu_i, d_i)` for every class of `f` from its counting polynomial
/// `G_i` and the universe polynomial `F` (which must have degree `n`):
/// `d_i = deg G_i`, `mu_i = lead(G_i) / lead(F)^{d_i/n}`, then measures
/// `|count − mu_i·|M|^{d_i/n}| / |M|^{d_i/n}` at each sampled member.
#[allow(clippy::too_many_arguments)]
pub fn ndim_certify(
    spec: &FamilySpec,
    f: &Formula,
    part: &VariablePartition,
    sel: &QSelector,
    indices: &[u64],
    n: usize,
    rel_tol: f64,
    opts: &AnalysisOptions,
) -> Result<NDimReport, AnalysisError> {
    let (uf, upart) = universe_formula();
    let universe = fit_counting_polynomials(spec, &uf, &upart, sel, indices, opts, false)?;
    let universe_poly = match universe.classes.as_slice() {
        [c] if universe.succeeded() => c.polynomial.clone().expect("fitted"),
        _ => {
            return Err(AnalysisError::NotPolynomial(format!(
                "universe size: {}",
                universe.diagnostics.join("; ")
            )))
        }
    };
    if universe_poly.degree() != Some(n) {
        return Err(AnalysisError::DegreeMismatch {
            claimed: n,
            fitted: universe_poly
                .degree()
                .map_or_else(|| "undefined".into(), |d| d.to_string()),
        });
    }
    let report = fit_counting_polynomials(spec, f, part, sel, indices, opts, false)?;
    if !report.succeeded() {
        return Err(AnalysisError::NotPolynomial(report.diagnostics.join("; ")));
    }
    let n_rat = integer(n as u64);
    let mut entries = Vec::new();
    for class in &report.classes {
        let g = class.polynomial.clone().expect("fitted");
        let (mu, mu_exact, d) = if g.is_constant() {
            let c = g.coefficient(0);
            (to_f64(&c), Some(c), 0)
        } else {
            let lead = composed_leading(&g, &universe_poly)?;
            (lead.mu, lead.mu_exact, g.degree().expect("nonconstant"))
        };
        let exponent = integer(d as u64) / &n_rat;
        let trace: Vec<ErrorSample> = report
            .members
            .iter()
            .zip(&class.counts)
            .map(|(m, &count)| ErrorSample {
                index: m.index,
                size: m.size,
                count,
                relative_error: relative_error(count, m.size, mu, mu_exact.as_ref(), &exponent),
            })
            .collect();
        let pass = settles(&trace, rel_tol);
        entries.push(NDimEntry {
            rank: class.rank,
            polynomial: g,
            mu,
            mu_exact,
            d,
            trace,
            pass,
        });
    }
    Ok(NDimReport {
        n,
        universe_polynomial: universe_poly,
        formula: f.to_string(),
        rel_tol,
        pass: entries.iter().all(|e| e.pass),
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZeroOneEntry {
    pub sentence: String,
    pub values: Vec<bool>,
    pub stabilized: bool,
    /// Value on the constant suffix.
    pub value: bool,
    /// First index of the longest constant suffix.
    pub first_stable_index: u64,
}

/// A truth-value sequence counts as stabilized when its constant suffix
/// covers at least half the samples, and at least two of them.
pub fn minimum_stable_suffix(samples: usize) -> usize {
    samples.div_ceil(2).max(2)
}

pub fn zero_one_scan(
    spec: &FamilySpec,
    sentences: &[Formula],
    indices: &[u64],
    opts: &AnalysisOptions,
) -> Result<Vec<ZeroOneEntry>, AnalysisError> {
    if indices.len() < 3 {
        return Err(AnalysisError::TooFewIndices {
            needed: 3,
            got: indices.len(),
        });
    }
    if let Some(f) = sentences.iter().find(|f| !f.is_sentence()) {
        return Err(AnalysisError::NotASentence(f.to_string()));
    }
    let rows = per_member(spec, indices, opts, |_, m| {
        sentences
            .iter()
            .map(|f| Ok(counting::evaluate(m, f, &Assignment::new())?))
            .collect::<Result<Vec<bool>, AnalysisError>>()
    })?;
    let needed = minimum_stable_suffix(indices.len());
    Ok(sentences
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let values: Vec<bool> = rows.iter().map(|r| r[k]).collect();
            let value = *values.last().expect("nonempty");
            let suffix = values.iter().rev().take_while(|&&v| v == value).count();
            ZeroOneEntry {
                sentence: f.to_string(),
                stabilized: suffix >= needed,
                value,
                first_stable_index: indices[indices.len() - suffix],
                values,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NumBound {
    pub bound: u64,
    /// Cardinalities that stayed fixed across all sampled members.
    pub constant_cardinalities: Vec<u64>,
    /// Always set: the bound only reflects the sampled members and is a
    /// lower estimate.
    pub caveat: bool,
    pub class_count_stable: bool,
}

/// `1 + max` of the fiber cardinalities belonging to classes that stay
/// constant across the sampled members.
pub fn num_bound(
    spec: &FamilySpec,
    f: &Formula,
    part: &VariablePartition,
    indices: &[u64],
    opts: &AnalysisOptions,
) -> Result<NumBound, AnalysisError> {
    check_partition_covers(f, part)?;
    let spectra = per_member(spec, indices, opts, |_, m| {
        let sp = fiber_spectrum_with_budget(m, f, part, &Assignment::new(), opts.budget)?;
        Ok(sp
            .entries
            .iter()
            .map(|e| e.cardinality)
            .collect::<Vec<u64>>())
    })?;
    let class_count_stable = spectra.windows(2).all(|w| w[0].len() == w[1].len());
    let constant_cardinalities: Vec<u64> = if class_count_stable {
        (0..spectra.first().map_or(0, Vec::len))
            .filter_map(|r| {
                let c = spectra[0][r];
                spectra.iter().all(|s| s[r] == c).then_some(c)
            })
            .collect()
    } else {
        let mut common: BTreeSet<u64> = spectra.first().into_iter().flatten().copied().collect();
        for s in &spectra[1..] {
            let here: BTreeSet<u64> = s.iter().copied().collect();
            common = common.intersection(&here).copied().collect();
        }
        common.into_iter().rev().collect()
    };
    let bound = constant_cardinalities.iter().max().map_or(1, |m| m + 1);
    Ok(NumBound {
        bound,
        constant_cardinalities,
        caveat: true,
        class_count_stable,
    })
}

/// Whether the nonempty solution sets of `formulas` over `vars` are pairwise
/// disjoint and cover `M^{|vars|}`.
pub fn check_partition(
    member: &FiniteStructure,
    formulas: &[Formula],
    vars: &[String],
    budget: u64,
) -> Result<bool, AnalysisError> {
    for f in formulas {
        if f.free_variables().iter().any(|v| !vars.contains(v)) {
            return Err(AnalysisError::ArityMismatch {
                formula: f.to_string(),
                vars: vars.to_vec(),
            });
        }
    }
    counting::check_budget(member.size(), vars.len(), budget)?;
    let evaluators = formulas
        .iter()
        .map(|f| Evaluator::with_free_order(member, f, vars))
        .collect::<Result<Vec<_>, _>>()?;
    let mut envs: Vec<Vec<usize>> = evaluators.iter().map(Evaluator::environment).collect();
    let mut ok = true;
    counting::for_each_tuple(member.size(), vars.len(), |t| {
        if !ok {
            return;
        }
        let mut hits = 0;
        for (ev, env) in evaluators.iter().zip(envs.iter_mut()) {
            env[..t.len()].copy_from_slice(t);
            if ev.eval(env) {
                hits += 1;
            }
        }
        ok = hits == 1;
    });
    Ok(ok)
}
