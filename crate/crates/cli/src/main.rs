//! `pfc`: count definable sets and recover counting polynomials over families
//! of finite structures.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when an analysis
//! runs but fails (no fit, unstable classes, failed certification).

mod render;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pfc_core::analysis::{
    fit_counting_polynomials, ndim_certify, num_bound, zero_one_scan, AnalysisError,
    AnalysisOptions, QSelector,
};
use pfc_core::counting::{
    fiber_spectrum_with_budget, verify_quotient_identity, verify_sum_identity, Assignment,
    CountingError, DEFAULT_BUDGET,
};
use pfc_core::logic::{parse_formula, Formula, Signature, VariablePartition};
use pfc_core::structures::{build_member, validate_structure, FamilySpec, StructureError};

use render::Format;

#[derive(Parser)]
#[command(
    name = "pfc",
    version,
    about = "Count definable sets across families of finite structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count the solutions of a formula in one family member.
    Count(PointArgs),
    /// Group parameter tuples by the size of their fiber in one member.
    Spectrum(PointArgs),
    /// Fit counting polynomials in q across sampled members.
    Fit(FitArgs),
    /// Like `fit`, with per-member class sizes and witnesses.
    Mec(FitArgs),
    /// Certify (mu, d) pairs against the universe polynomial of degree N.
    Ndim(NdimArgs),
    /// Check whether sentences settle to a fixed truth value.
    ZeroOne(ZeroOneArgs),
    /// Estimate a bound on the finite fiber sizes of a formula.
    NumBound(NumBoundArgs),
    /// Build sampled members and check them against the signature.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Common {
    /// Family spec JSON file.
    #[arg(long)]
    family: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Maximum number of tuples a single enumeration may visit.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads for per-member work.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct FormulaArgs {
    /// Formula text, or @FILE to read it from a file.
    #[arg(long)]
    formula: String,
    /// Comma-separated object variables.
    #[arg(long)]
    object: Option<String>,
    /// Comma-separated parameter variables.
    #[arg(long)]
    param: Option<String>,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    formula: FormulaArgs,
    #[arg(long)]
    index: u64,
    /// Fix a free variable: VAR=ELEM. Repeatable.
    #[arg(long = "at", value_name = "VAR=ELEM")]
    at: Vec<String>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    formula: FormulaArgs,
    /// Set whose size is q: THETA or THETA;KAPPA.
    #[arg(long, default_value = "v = v")]
    q: String,
    /// Inclusive index range LO..HI.
    #[arg(long)]
    indices: Option<String>,
}

#[derive(Args)]
struct NdimArgs {
    #[command(flatten)]
    fit: FitArgs,
    /// Claimed dimension of the universe.
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
}

#[derive(Args)]
struct ZeroOneArgs {
    #[command(flatten)]
    common: Common,
    /// Sentence text or @FILE. Repeatable.
    #[arg(long, required = true)]
    formula: Vec<String>,
    #[arg(long)]
    indices: Option<String>,
}

#[derive(Args)]
struct NumBoundArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    formula: FormulaArgs,
    #[arg(long)]
    indices: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Formulas to check against the signature. Repeatable.
    #[arg(long)]
    formula: Vec<String>,
    #[arg(long)]
    indices: Option<String>,
}

/// Why a run did not succeed.
enum Failure {
    /// Bad flags, unreadable files, parse errors, budget overruns.
    Input(String),
    /// The analysis ran and reported a negative outcome.
    Analysis(String),
}

impl<E: fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn analysis_failure(e: AnalysisError) -> Failure {
    match e {
        AnalysisError::DegreeMismatch { .. }
        | AnalysisError::NotPolynomial(_)
        | AnalysisError::TooFewIndices { .. } => Failure::Analysis(e.to_string()),
        other => Failure::Input(other.to_string()),
    }
}

fn read_formula_text(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map(|s| s.trim().to_string())
            .map_err(|e| Failure::Input(format!("cannot read formula file {path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn parse(arg: &str, sig: &Signature) -> Result<Formula, Failure> {
    let text = read_formula_text(arg)?;
    parse_formula(&text, sig).map_err(|e| Failure::Input(format!("in `{text}`: {e}")))
}

fn split_vars(list: &Option<String>) -> Option<Vec<String>> {
    list.as_ref().map(|s| {
        s.split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(String::from)
            .collect()
    })
}

/// Missing sides default to the free variables not named on the other side
/// (or in `fixed`).
fn partition(
    f: &Formula,
    args: &FormulaArgs,
    fixed: &[String],
) -> Result<VariablePartition, Failure> {
    let free = f.free_variables();
    let rest = |taken: &[String]| -> Vec<String> {
        free.iter()
            .filter(|v| !taken.contains(v) && !fixed.contains(v))
            .cloned()
            .collect()
    };
    let (object, param) = match (split_vars(&args.object), split_vars(&args.param)) {
        (Some(o), Some(p)) => (o, p),
        (Some(o), None) => {
            let p = rest(&o);
            (o, p)
        }
        (None, Some(p)) => (rest(&p), p),
        (None, None) => (rest(&[]), Vec::new()),
    };
    Ok(VariablePartition::new(object, param)?)
}

fn parse_at(at: &[String]) -> Result<Assignment, Failure> {
    at.iter()
        .map(|s| {
            let (v, e) = s
                .split_once('=')
                .ok_or_else(|| Failure::Input(format!("--at expects VAR=ELEM, got `{s}`")))?;
            let e: usize = e
                .trim()
                .parse()
                .map_err(|_| Failure::Input(format!("--at: `{e}` is not an element")))?;
            Ok((v.trim().to_string(), e))
        })
        .collect()
}

fn parse_indices(arg: &Option<String>, spec: &FamilySpec) -> Result<Vec<u64>, Failure> {
    let Some(text) = arg else {
        return Ok(spec.default_indices());
    };
    let bad = || Failure::Input(format!("--indices expects LO..HI, got `{text}`"));
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(Failure::Input(format!("index range {lo}..{hi} is empty")));
    }
    let (dlo, dhi) = spec.index_domain();
    if lo < dlo || hi > dhi {
        return Err(Failure::Input(format!(
            "index range {lo}..{hi} leaves the family's domain {dlo}..{dhi}"
        )));
    }
    Ok((lo..=hi).collect())
}

fn load(common: &Common) -> Result<FamilySpec, Failure> {
    FamilySpec::from_path(&common.family).map_err(|e| match e {
        StructureError::Io(_) | StructureError::Json(_) => {
            Failure::Input(format!("{}: {e}", common.family.display()))
        }
        other => Failure::Input(other.to_string()),
    })
}

fn options(common: &Common) -> Result<AnalysisOptions, Failure> {
    if common.jobs == Some(0) {
        return Err(Failure::Input("--jobs must be positive".into()));
    }
    Ok(AnalysisOptions {
        budget: common.budget,
        jobs: common.jobs,
    })
}

struct Outcome {
    text: String,
    success: bool,
}

fn ok(text: String) -> Result<Outcome, Failure> {
    Ok(Outcome {
        text,
        success: true,
    })
}

fn run_count(a: &PointArgs, spectrum: bool) -> Result<Outcome, Failure> {
    let spec = load(&a.common)?;
    let sig = spec.signature();
    let f = parse(&a.formula.formula, sig)?;
    let at = parse_at(&a.at)?;
    let fixed: Vec<String> = at.keys().cloned().collect();
    let member = build_member(&spec, a.index)?;
    let budget = a.common.budget;
    let family = a.common.family.display().to_string();
    if spectrum {
        let part = partition(&f, &a.formula, &fixed)?;
        let sp = fiber_spectrum_with_budget(&member, &f, &part, &at, budget)?;
        let sum = verify_sum_identity(&sp, &member, &f, &part, &at)?;
        let quotient = verify_quotient_identity(&member, &f, &part, &at)?;
        let report = render::SpectrumReport {
            command: "spectrum",
            family,
            index: a.index,
            formula: f.to_string(),
            object: part.object().to_vec(),
            parameter: part.parameter().to_vec(),
            assignment: at,
            total_pairs: sp.total_pairs,
            classes: sp.entries,
            sum_identity: sum,
            quotient_identity: quotient,
        };
        return ok(render::spectrum(&report, a.common.format));
    }
    // parameters of a count are exactly the fixed variables
    let object = match split_vars(&a.formula.object) {
        Some(o) => o,
        None => f
            .free_variables()
            .into_iter()
            .filter(|v| !fixed.contains(v))
            .collect(),
    };
    if let Some(p) = split_vars(&a.formula.param) {
        if let Some(v) = p.iter().find(|v| !fixed.contains(v)) {
            return Err(CountingError::Unassigned(v.clone()).into());
        }
    }
    let part = VariablePartition::new(object, fixed)?;
    let count = pfc_core::counting::count_solutions_with_budget(&member, &f, &part, &at, budget)?;
    let report = render::CountReport {
        command: "count",
        family,
        index: a.index,
        formula: f.to_string(),
        object: part.object().to_vec(),
        parameter: part.parameter().to_vec(),
        assignment: at,
        count,
    };
    ok(render::count(&report, a.common.format))
}

fn run_fit(a: &FitArgs, detail: bool) -> Result<Outcome, Failure> {
    let spec = load(&a.common)?;
    let sig = spec.signature();
    let f = parse(&a.formula.formula, sig)?;
    let part = partition(&f, &a.formula, &[])?;
    let sel = QSelector::parse(&read_formula_text(&a.q)?, sig).map_err(analysis_failure)?;
    let indices = parse_indices(&a.indices, &spec)?;
    let opts = options(&a.common)?;
    let report = fit_counting_polynomials(&spec, &f, &part, &sel, &indices, &opts, detail)
        .map_err(analysis_failure)?;
    let wrapped = render::Wrapped {
        command: if detail { "mec" } else { "fit" },
        family: a.common.family.display().to_string(),
        report: &report,
    };
    Ok(Outcome {
        text: render::fit(&wrapped, a.common.format),
        success: report.succeeded(),
    })
}

fn run_ndim(a: &NdimArgs) -> Result<Outcome, Failure> {
    if !(a.rel_tol > 0.0 && a.rel_tol.is_finite()) {
        return Err(Failure::Input("--rel-tol must be positive".into()));
    }
    if a.n == 0 {
        return Err(Failure::Input("--N must be positive".into()));
    }
    let fa = &a.fit;
    let spec = load(&fa.common)?;
    let sig = spec.signature();
    let f = parse(&fa.formula.formula, sig)?;
    let part = partition(&f, &fa.formula, &[])?;
    let sel = QSelector::parse(&read_formula_text(&fa.q)?, sig).map_err(analysis_failure)?;
    let indices = parse_indices(&fa.indices, &spec)?;
    let opts = options(&fa.common)?;
    let report = ndim_certify(&spec, &f, &part, &sel, &indices, a.n, a.rel_tol, &opts)
        .map_err(analysis_failure)?;
    let wrapped = render::Wrapped {
        command: "ndim",
        family: fa.common.family.display().to_string(),
        report: &report,
    };
    Ok(Outcome {
        text: render::ndim(&wrapped, fa.common.format),
        success: report.pass,
    })
}

fn run_zero_one(a: &ZeroOneArgs) -> Result<Outcome, Failure> {
    let spec = load(&a.common)?;
    let sentences = a
        .formula
        .iter()
        .map(|s| parse(s, spec.signature()))
        .collect::<Result<Vec<_>, _>>()?;
    let indices = parse_indices(&a.indices, &spec)?;
    let opts = options(&a.common)?;
    let rows = zero_one_scan(&spec, &sentences, &indices, &opts).map_err(|e| match e {
        AnalysisError::TooFewIndices { .. } | AnalysisError::NotASentence(_) => {
            Failure::Input(e.to_string())
        }
        other => analysis_failure(other),
    })?;
    let report = render::ZeroOneReport {
        command: "zero-one",
        family: a.common.family.display().to_string(),
        indices,
        all_stabilized: rows.iter().all(|r| r.stabilized),
        sentences: rows,
    };
    Ok(Outcome {
        text: render::zero_one(&report, a.common.format),
        success: report.all_stabilized,
    })
}

fn run_num_bound(a: &NumBoundArgs) -> Result<Outcome, Failure> {
    let spec = load(&a.common)?;
    let f = parse(&a.formula.formula, spec.signature())?;
    let part = partition(&f, &a.formula, &[])?;
    let indices = parse_indices(&a.indices, &spec)?;
    let opts = options(&a.common)?;
    let bound = num_bound(&spec, &f, &part, &indices, &opts).map_err(analysis_failure)?;
    let report = render::NumBoundReport {
        command: "num-bound",
        family: a.common.family.display().to_string(),
        formula: f.to_string(),
        object: part.object().to_vec(),
        parameter: part.parameter().to_vec(),
        indices,
        result: bound,
    };
    ok(render::num_bound(&report, a.common.format))
}

fn run_validate(a: &ValidateArgs) -> Result<Outcome, Failure> {
    let spec = load(&a.common)?;
    let formulas = a
        .formula
        .iter()
        .map(|s| parse(s, spec.signature()).map(|f| f.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let indices = parse_indices(&a.indices, &spec)?;
    let mut members = Vec::new();
    for &i in &indices {
        let check = match build_member(&spec, i) {
            Ok(m) => render::MemberCheck {
                index: i,
                size: Some(m.size()),
                violations: validate_structure(&m, spec.signature()),
            },
            Err(StructureError::InvalidMember { violations, .. }) => render::MemberCheck {
                index: i,
                size: None,
                violations,
            },
            Err(e) => return Err(e.into()),
        };
        members.push(check);
    }
    let report = render::ValidateReport {
        command: "validate",
        family: a.common.family.display().to_string(),
        valid: members.iter().all(|m| m.violations.is_empty()),
        members,
        formulas,
    };
    Ok(Outcome {
        text: render::validate(&report, a.common.format),
        success: report.valid,
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Count(_) => "count",
        Command::Spectrum(_) => "spectrum",
        Command::Fit(_) => "fit",
        Command::Mec(_) => "mec",
        Command::Ndim(_) => "ndim",
        Command::ZeroOne(_) => "zero-one",
        Command::NumBound(_) => "num-bound",
        Command::Validate(_) => "validate",
    }
}

fn format_of(c: &Command) -> Format {
    match c {
        Command::Count(a) | Command::Spectrum(a) => a.common.format,
        Command::Fit(a) | Command::Mec(a) => a.common.format,
        Command::Ndim(a) => a.fit.common.format,
        Command::ZeroOne(a) => a.common.format,
        Command::NumBound(a) => a.common.format,
        Command::Validate(a) => a.common.format,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Count(a) => run_count(a, false),
        Command::Spectrum(a) => run_count(a, true),
        Command::Fit(a) => run_fit(a, false),
        Command::Mec(a) => run_fit(a, true),
        Command::Ndim(a) => run_ndim(a),
        Command::ZeroOne(a) => run_zero_one(a),
        Command::NumBound(a) => run_num_bound(a),
        Command::Validate(a) => run_validate(a),
    };
    match result {
        Ok(out) => {
            print!("{}", out.text);
            if out.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Analysis(msg)) => {
            let name = command_name(&cli.command);
            print!("{}", render::failure(name, &msg, format_of(&cli.command)));
            eprintln!("analysis failed: {msg}");
            ExitCode::from(2)
        }
    }
}
