//! Python bindings. Reports come back as plain dicts and lists; exact
//! rationals come back as `fractions.Fraction`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use pfc_core::analysis::{self, AnalysisOptions, QSelector};
use pfc_core::counting::{self, Assignment, DEFAULT_BUDGET};
use pfc_core::logic::{self, RelationSymbol, VariablePartition};
use pfc_core::polynomials::{self, LimitExpr, RationalPolynomial};
use pfc_core::structures::{self, FiniteStructure};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializes through JSON into Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn fraction<'py>(py: Python<'py>, r: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((r.to_string(),))
}

/// Accepts ints, `Fraction`s and strings like `"3/5"`.
fn rational(obj: &Bound<'_, PyAny>) -> PyResult<BigRational> {
    let text = obj.str()?.to_string();
    text.trim()
        .parse::<BigRational>()
        .map_err(|_| PyValueError::new_err(format!("`{text}` is not an exact rational")))
}

#[pyclass(name = "Signature", module = "pfc", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySignature(logic::Signature);

#[pymethods]
impl PySignature {
    #[new]
    #[pyo3(signature = (relations, constants = Vec::new()))]
    fn new(relations: Vec<(String, usize)>, constants: Vec<String>) -> PyResult<Self> {
        let relations = relations
            .into_iter()
            .map(|(name, arity)| RelationSymbol { name, arity })
            .collect();
        logic::Signature::new(relations, constants)
            .map(PySignature)
            .map_err(value_error)
    }

    /// Two unary predicates `P0`, `P1` and a binary relation `R`.
    #[staticmethod]
    fn k23() -> Self {
        PySignature(logic::Signature::k23())
    }

    #[getter]
    fn relations(&self) -> Vec<(String, usize)> {
        self.0
            .relations()
            .iter()
            .map(|r| (r.name.clone(), r.arity))
            .collect()
    }

    #[getter]
    fn constants(&self) -> Vec<String> {
        self.0.constants().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Signature(relations={:?}, constants={:?})",
            self.relations(),
            self.constants()
        )
    }
}

#[pyclass(name = "Formula", module = "pfc", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyFormula(logic::Formula);

#[pymethods]
impl PyFormula {
    #[staticmethod]
    fn parse(text: &str, signature: &PySignature) -> PyResult<Self> {
        logic::parse_formula(text, &signature.0)
            .map(PyFormula)
            .map_err(value_error)
    }

    fn free_variables(&self) -> Vec<String> {
        self.0.free_variables()
    }

    fn is_sentence(&self) -> bool {
        self.0.is_sentence()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", self.0.to_string())
    }
}

#[pyclass(name = "Structure", module = "pfc", frozen)]
struct PyStructure(FiniteStructure);

#[pymethods]
impl PyStructure {
    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    fn relation(&self, name: &str) -> PyResult<Vec<Vec<usize>>> {
        self.0
            .relation(name)
            .map(|t| t.tuples().cloned().collect())
            .ok_or_else(|| PyValueError::new_err(format!("no relation `{name}`")))
    }

    fn relation_len(&self, name: &str) -> usize {
        self.0.relation_len(name)
    }

    #[getter]
    fn constants(&self) -> BTreeMap<String, usize> {
        self.0.constants().clone()
    }

    fn validate(&self, signature: &PySignature) -> Vec<String> {
        structures::validate_structure(&self.0, &signature.0)
    }

    #[pyo3(signature = (formula, assignment = Assignment::new()))]
    fn evaluate(&self, formula: &PyFormula, assignment: Assignment) -> PyResult<bool> {
        counting::evaluate(&self.0, &formula.0, &assignment).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("Structure(size={})", self.0.size())
    }
}

#[pyclass(name = "FamilySpec", module = "pfc", frozen)]
struct PyFamilySpec(structures::FamilySpec);

#[pymethods]
impl PyFamilySpec {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        structures::FamilySpec::from_json(text)
            .map(PyFamilySpec)
            .map_err(value_error)
    }

    #[staticmethod]
    fn from_path(path: std::path::PathBuf) -> PyResult<Self> {
        structures::FamilySpec::from_path(path)
            .map(PyFamilySpec)
            .map_err(value_error)
    }

    #[staticmethod]
    fn k23(max_index: u64) -> Self {
        PyFamilySpec(structures::FamilySpec::k23(max_index))
    }

    #[staticmethod]
    fn pure_set(max_index: u64) -> Self {
        PyFamilySpec(structures::FamilySpec::pure_set(max_index))
    }

    #[staticmethod]
    fn bipartite(p: usize, q: usize, max_index: u64) -> PyResult<Self> {
        structures::FamilySpec::bipartite(p, q, max_index)
            .map(PyFamilySpec)
            .map_err(value_error)
    }

    #[getter]
    fn signature(&self) -> PySignature {
        PySignature(self.0.signature().clone())
    }

    #[getter]
    fn index_domain(&self) -> (u64, u64) {
        self.0.index_domain()
    }

    fn default_indices(&self) -> Vec<u64> {
        self.0.default_indices()
    }

    fn member(&self, index: u64) -> PyResult<PyStructure> {
        structures::build_member(&self.0, index)
            .map(PyStructure)
            .map_err(value_error)
    }

    fn parse(&self, text: &str) -> PyResult<PyFormula> {
        logic::parse_formula(text, self.0.signature())
            .map(PyFormula)
            .map_err(value_error)
    }
}

#[pyclass(name = "Polynomial", module = "pfc", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPolynomial(RationalPolynomial);

#[pymethods]
impl PyPolynomial {
    /// Coefficients from the constant term up.
    #[new]
    fn new(coefficients: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let coeffs = coefficients.iter().map(rational).collect::<PyResult<_>>()?;
        Ok(PyPolynomial(RationalPolynomial::new(coeffs)))
    }

    /// Parses the printed form, e.g. `"(5/2)*X + 1"`.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        text.parse().map(PyPolynomial).map_err(value_error)
    }

    #[getter]
    fn degree(&self) -> Option<usize> {
        self.0.degree()
    }

    fn coefficients<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.0
            .coefficients()
            .iter()
            .map(|c| fraction(py, c))
            .collect()
    }

    fn __call__<'py>(&self, py: Python<'py>, x: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.eval(&rational(x)?))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Polynomial({:?})", self.0.to_string())
    }
}

fn partition(object: Vec<String>, param: Vec<String>) -> PyResult<VariablePartition> {
    VariablePartition::new(object, param).map_err(value_error)
}

/// Number of object tuples satisfying the formula with the parameters fixed
/// by `assignment`.
#[pyfunction]
#[pyo3(signature = (structure, formula, object, assignment = Assignment::new(), budget = DEFAULT_BUDGET))]
fn count(
    structure: &PyStructure,
    formula: &PyFormula,
    object: Vec<String>,
    assignment: Assignment,
    budget: u64,
) -> PyResult<u64> {
    let part = partition(object, assignment.keys().cloned().collect())?;
    counting::count_solutions_with_budget(&structure.0, &formula.0, &part, &assignment, budget)
        .map_err(value_error)
}

/// Fiber classes as dicts `{cardinality, members}`, largest first.
#[pyfunction]
#[pyo3(signature = (structure, formula, object, param, outer = Assignment::new(), budget = DEFAULT_BUDGET))]
fn spectrum<'py>(
    py: Python<'py>,
    structure: &PyStructure,
    formula: &PyFormula,
    object: Vec<String>,
    param: Vec<String>,
    outer: Assignment,
    budget: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let part = partition(object, param)?;
    let sp = counting::fiber_spectrum_with_budget(&structure.0, &formula.0, &part, &outer, budget)
        .map_err(value_error)?;
    to_py(py, &sp)
}

#[pyfunction]
#[pyo3(signature = (structure, formula, object, param, outer = Assignment::new()))]
fn quotient_identity<'py>(
    py: Python<'py>,
    structure: &PyStructure,
    formula: &PyFormula,
    object: Vec<String>,
    param: Vec<String>,
    outer: Assignment,
) -> PyResult<Bound<'py, PyAny>> {
    let part = partition(object, param)?;
    let q = counting::verify_quotient_identity(&structure.0, &formula.0, &part, &outer)
        .map_err(value_error)?;
    to_py(py, &q)
}

/// Least-degree exact interpolant through `(x, y)` pairs; at least
/// `max_degree + 2` points, the extra ones held out as checks.
#[pyfunction]
#[pyo3(signature = (points, max_degree = None))]
fn interpolate(
    points: Vec<(Bound<'_, PyAny>, Bound<'_, PyAny>)>,
    max_degree: Option<usize>,
) -> PyResult<PyPolynomial> {
    let pts = points
        .iter()
        .map(|(x, y)| Ok((rational(x)?, rational(y)?)))
        .collect::<PyResult<Vec<_>>>()?;
    let max_degree = max_degree.unwrap_or(pts.len().saturating_sub(2));
    polynomials::interpolate(&pts, max_degree)
        .map(|fit| PyPolynomial(fit.poly))
        .map_err(value_error)
}

#[pyfunction]
fn inverse_shift_limit<'py>(py: Python<'py>, p: &PyPolynomial) -> PyResult<Bound<'py, PyAny>> {
    let l = polynomials::inverse_shift_limit(&p.0).map_err(value_error)?;
    fraction(py, &l)
}

#[pyfunction]
#[pyo3(signature = (p, probes, target, rel_tol = 1e-3))]
fn inverse_shift_check<'py>(
    py: Python<'py>,
    p: &PyPolynomial,
    probes: Vec<f64>,
    target: f64,
    rel_tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let lc =
        polynomials::empirical_limit_check(LimitExpr::InverseShift(&p.0), &probes, target, rel_tol)
            .map_err(value_error)?;
    to_py(py, &lc)
}

#[pyfunction]
fn composed_leading<'py>(
    py: Python<'py>,
    g: &PyPolynomial,
    f: &PyPolynomial,
) -> PyResult<Bound<'py, PyAny>> {
    let c = polynomials::composed_leading(&g.0, &f.0).map_err(value_error)?;
    to_py(py, &c)
}

fn options(budget: u64, jobs: Option<usize>) -> AnalysisOptions {
    AnalysisOptions { budget, jobs }
}

fn indices_or_default(spec: &PyFamilySpec, indices: Option<Vec<u64>>) -> Vec<u64> {
    indices.unwrap_or_else(|| spec.0.default_indices())
}

/// Fits one counting polynomial in `q = |theta|` per fiber class.
#[pyfunction]
#[pyo3(signature = (family, formula, object, param = Vec::new(), q = "v = v", indices = None, detail = false, budget = DEFAULT_BUDGET, jobs = None))]
#[allow(clippy::too_many_arguments)]
fn fit<'py>(
    py: Python<'py>,
    family: &PyFamilySpec,
    formula: &PyFormula,
    object: Vec<String>,
    param: Vec<String>,
    q: &str,
    indices: Option<Vec<u64>>,
    detail: bool,
    budget: u64,
    jobs: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let sel = QSelector::parse(q, family.0.signature()).map_err(value_error)?;
    let part = partition(object, param)?;
    let idx = indices_or_default(family, indices);
    let report = py
        .detach(|| {
            analysis::fit_counting_polynomials(
                &family.0,
                &formula.0,
                &part,
                &sel,
                &idx,
                &options(budget, jobs),
                detail,
            )
        })
        .map_err(value_error)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (family, formula, object, n, param = Vec::new(), q = "v = v", rel_tol = 1e-6, indices = None, budget = DEFAULT_BUDGET, jobs = None))]
#[allow(clippy::too_many_arguments)]
fn ndim<'py>(
    py: Python<'py>,
    family: &PyFamilySpec,
    formula: &PyFormula,
    object: Vec<String>,
    n: usize,
    param: Vec<String>,
    q: &str,
    rel_tol: f64,
    indices: Option<Vec<u64>>,
    budget: u64,
    jobs: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let sel = QSelector::parse(q, family.0.signature()).map_err(value_error)?;
    let part = partition(object, param)?;
    let idx = indices_or_default(family, indices);
    let report = py
        .detach(|| {
            analysis::ndim_certify(
                &family.0,
                &formula.0,
                &part,
                &sel,
                &idx,
                n,
                rel_tol,
                &options(budget, jobs),
            )
        })
        .map_err(value_error)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (family, sentences, indices = None, budget = DEFAULT_BUDGET, jobs = None))]
fn zero_one<'py>(
    py: Python<'py>,
    family: &PyFamilySpec,
    sentences: Vec<PyFormula>,
    indices: Option<Vec<u64>>,
    budget: u64,
    jobs: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let sentences: Vec<logic::Formula> = sentences.into_iter().map(|f| f.0).collect();
    let idx = indices_or_default(family, indices);
    let rows = analysis::zero_one_scan(&family.0, &sentences, &idx, &options(budget, jobs))
        .map_err(value_error)?;
    to_py(py, &rows)
}

#[pyfunction]
#[pyo3(signature = (family, formula, object, param, indices = None, budget = DEFAULT_BUDGET, jobs = None))]
#[allow(clippy::too_many_arguments)]
fn num_bound<'py>(
    py: Python<'py>,
    family: &PyFamilySpec,
    formula: &PyFormula,
    object: Vec<String>,
    param: Vec<String>,
    indices: Option<Vec<u64>>,
    budget: u64,
    jobs: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let part = partition(object, param)?;
    let idx = indices_or_default(family, indices);
    let b = analysis::num_bound(&family.0, &formula.0, &part, &idx, &options(budget, jobs))
        .map_err(value_error)?;
    to_py(py, &b)
}

#[pyfunction]
#[pyo3(signature = (structure, formulas, vars, budget = DEFAULT_BUDGET))]
fn check_partition(
    structure: &PyStructure,
    formulas: Vec<PyFormula>,
    vars: Vec<String>,
    budget: u64,
) -> PyResult<bool> {
    let formulas: Vec<logic::Formula> = formulas.into_iter().map(|f| f.0).collect();
    analysis::check_partition(&structure.0, &formulas, &vars, budget).map_err(value_error)
}

#[pymodule]
fn pfc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySignature>()?;
    m.add_class::<PyFormula>()?;
    m.add_class::<PyStructure>()?;
    m.add_class::<PyFamilySpec>()?;
    m.add_class::<PyPolynomial>()?;
    m.add_function(wrap_pyfunction!(count, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(quotient_identity, m)?)?;
    m.add_function(wrap_pyfunction!(interpolate, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_shift_limit, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_shift_check, m)?)?;
    m.add_function(wrap_pyfunction!(composed_leading, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(ndim, m)?)?;
    m.add_function(wrap_pyfunction!(zero_one, m)?)?;
    m.add_function(wrap_pyfunction!(num_bound, m)?)?;
    m.add_function(wrap_pyfunction!(check_partition, m)?)?;
    Ok(())
}
