//! Report types and their json, table and csv renderings.

use std::fmt::Write as _;

use clap::ValueEnum;
use pfc_core::analysis::{MecReport, NDimReport, NumBound, ZeroOneEntry};
use pfc_core::counting::{Assignment, FiberClass, QuotientIdentityCheck, SumIdentityCheck};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Serialize)]
pub struct CountReport {
    pub command: &'static str,
    pub family: String,
    pub index: u64,
    pub formula: String,
    pub object: Vec<String>,
    pub parameter: Vec<String>,
    pub assignment: Assignment,
    pub count: u64,
}

#[derive(Serialize)]
pub struct SpectrumReport {
    pub command: &'static str,
    pub family: String,
    pub index: u64,
    pub formula: String,
    pub object: Vec<String>,
    pub parameter: Vec<String>,
    pub assignment: Assignment,
    pub total_pairs: u64,
    pub classes: Vec<FiberClass>,
    pub sum_identity: SumIdentityCheck,
    pub quotient_identity: QuotientIdentityCheck,
}

#[derive(Serialize)]
pub struct Wrapped<'a, T> {
    pub command: &'static str,
    pub family: String,
    #[serde(flatten)]
    pub report: &'a T,
}

#[derive(Serialize)]
pub struct ZeroOneReport {
    pub command: &'static str,
    pub family: String,
    pub indices: Vec<u64>,
    pub all_stabilized: bool,
    pub sentences: Vec<ZeroOneEntry>,
}

#[derive(Serialize)]
pub struct NumBoundReport {
    pub command: &'static str,
    pub family: String,
    pub formula: String,
    pub object: Vec<String>,
    pub parameter: Vec<String>,
    pub indices: Vec<u64>,
    #[serde(flatten)]
    pub result: NumBound,
}

#[derive(Serialize)]
pub struct MemberCheck {
    pub index: u64,
    /// `None` when the member could not be built.
    pub size: Option<usize>,
    pub violations: Vec<String>,
}

#[derive(Serialize)]
pub struct ValidateReport {
    pub command: &'static str,
    pub family: String,
    pub valid: bool,
    pub members: Vec<MemberCheck>,
    pub formulas: Vec<String>,
}

#[derive(Serialize)]
struct FailureReport<'a> {
    command: &'a str,
    status: &'static str,
    error: &'a str,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Left-aligned columns separated by two spaces.
fn table(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        let mut l = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i + 1 == cells.len() {
                l.push_str(c);
            } else {
                let _ = write!(l, "{c:<w$}  ");
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(
        &mut out,
        &header.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
    );
    for r in &rows {
        line(&mut out, r);
    }
    out
}

fn tuple(t: &[usize]) -> String {
    let inner: Vec<String> = t.iter().map(usize::to_string).collect();
    format!("({})", inner.join(","))
}

fn yes(b: bool) -> String {
    if b { "yes" } else { "no" }.to_string()
}

pub fn count(r: &CountReport, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Table => format!("{}\n", r.count),
        Format::Csv => csv_text(
            &["index", "formula", "count"],
            vec![vec![
                r.index.to_string(),
                r.formula.clone(),
                r.count.to_string(),
            ]],
        ),
    }
}

pub fn spectrum(r: &SpectrumReport, format: Format) -> String {
    let header = ["cardinality", "size", "witness"];
    let rows = r
        .classes
        .iter()
        .map(|c| {
            vec![
                c.cardinality.to_string(),
                c.len().to_string(),
                c.witness().map(tuple).unwrap_or_default(),
            ]
        })
        .collect();
    match format {
        Format::Json => json(r),
        Format::Csv => csv_text(&header, rows),
        Format::Table => {
            let mut out = format!(
                "{} at index {}, object ({}) parameter ({})\n",
                r.formula,
                r.index,
                r.object.join(","),
                r.parameter.join(",")
            );
            out.push_str(&table(&header, rows));
            let _ = writeln!(
                out,
                "pairs {}  sum identity {}",
                r.total_pairs,
                if r.sum_identity.holds {
                    "holds"
                } else {
                    "FAILS"
                }
            );
            let q = &r.quotient_identity;
            match q.b {
                Some(b) => {
                    let _ = writeln!(
                        out,
                        "quotient identity with B = {b}: {} (projection {})",
                        if q.holds { "holds" } else { "FAILS" },
                        q.projection_count
                    );
                }
                None => out.push_str("quotient identity not applicable\n"),
            }
            out
        }
    }
}

pub fn fit(w: &Wrapped<'_, MecReport>, format: Format) -> String {
    let r = w.report;
    match format {
        Format::Json => json(w),
        Format::Csv => {
            let mut header = vec!["index".to_string(), "size".into(), "q".into()];
            header.extend(r.classes.iter().map(|c| format!("class_{}", c.rank)));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows = r
                .members
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    let mut row = vec![m.index.to_string(), m.size.to_string(), m.q.to_string()];
                    row.extend(r.classes.iter().map(|c| c.counts[k].to_string()));
                    row
                })
                .collect();
            csv_text(&header, rows)
        }
        Format::Table => {
            let mut out = format!(
                "{} over object ({}) parameter ({}), q = |{}|\n",
                r.formula,
                r.object_vars.join(","),
                r.parameter_vars.join(","),
                r.q_selector
            );
            let header = ["class", "polynomial", "degree", "lead>0", "held-out"];
            let rows = r
                .classes
                .iter()
                .map(|c| {
                    vec![
                        c.rank.to_string(),
                        c.polynomial
                            .as_ref()
                            .map_or_else(|| "none".into(), ToString::to_string),
                        c.degree.map_or_else(|| "-".into(), |d| d.to_string()),
                        c.leading_coefficient_positive
                            .map_or_else(|| "-".into(), yes),
                        yes(c.held_out_verified),
                    ]
                })
                .collect();
            out.push_str(&table(&header, rows));
            for c in &r.classes {
                if let Some(sizes) = &c.class_sizes {
                    let sizes: Vec<String> = sizes.iter().map(usize::to_string).collect();
                    let _ = writeln!(out, "class {} sizes: {}", c.rank, sizes.join(" "));
                }
                if let Some(ws) = &c.witnesses {
                    let ws: Vec<String> = ws.iter().map(|t| tuple(t)).collect();
                    let _ = writeln!(out, "class {} witnesses: {}", c.rank, ws.join(" "));
                }
            }
            let _ = writeln!(
                out,
                "class count stable: {}  polynomial family: {}",
                yes(r.class_count_stable),
                yes(r.polynomial_family)
            );
            for d in &r.diagnostics {
                let _ = writeln!(out, "note: {d}");
            }
            out
        }
    }
}

pub fn ndim(w: &Wrapped<'_, NDimReport>, format: Format) -> String {
    let r = w.report;
    match format {
        Format::Json => json(w),
        Format::Csv => {
            let rows = r
                .entries
                .iter()
                .flat_map(|e| {
                    e.trace.iter().map(move |s| {
                        vec![
                            e.rank.to_string(),
                            s.index.to_string(),
                            s.size.to_string(),
                            s.count.to_string(),
                            s.relative_error.to_string(),
                        ]
                    })
                })
                .collect();
            csv_text(&["class", "index", "size", "count", "relative_error"], rows)
        }
        Format::Table => {
            let mut out = format!(
                "{} with N = {}, universe {}\n",
                r.formula, r.n, r.universe_polynomial
            );
            let header = [
                "class",
                "polynomial",
                "mu",
                "exact",
                "d",
                "last error",
                "pass",
            ];
            let rows = r
                .entries
                .iter()
                .map(|e| {
                    vec![
                        e.rank.to_string(),
                        e.polynomial.to_string(),
                        e.mu.to_string(),
                        e.mu_exact
                            .as_ref()
                            .map_or_else(|| "-".into(), ToString::to_string),
                        e.d.to_string(),
                        e.trace
                            .last()
                            .map_or_else(|| "-".into(), |s| format!("{:e}", s.relative_error)),
                        yes(e.pass),
                    ]
                })
                .collect();
            out.push_str(&table(&header, rows));
            let _ = writeln!(out, "certified: {}", yes(r.pass));
            out
        }
    }
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn zero_one(r: &ZeroOneReport, format: Format) -> String {
    let header = ["sentence", "stabilized", "value", "from", "values"];
    let rows = r
        .sentences
        .iter()
        .map(|s| {
            vec![
                s.sentence.clone(),
                yes(s.stabilized),
                s.value.to_string(),
                s.first_stable_index.to_string(),
                bits(&s.values),
            ]
        })
        .collect();
    match format {
        Format::Json => json(r),
        Format::Csv => csv_text(&header, rows),
        Format::Table => table(&header, rows),
    }
}

pub fn num_bound(r: &NumBoundReport, format: Format) -> String {
    let constants: Vec<String> = r
        .result
        .constant_cardinalities
        .iter()
        .map(u64::to_string)
        .collect();
    match format {
        Format::Json => json(r),
        Format::Csv => csv_text(
            &["formula", "bound", "constant_cardinalities"],
            vec![vec![
                r.formula.clone(),
                r.result.bound.to_string(),
                constants.join(" "),
            ]],
        ),
        Format::Table => format!(
            "bound {} (estimate from the sampled members; constant fiber sizes: {})\n",
            r.result.bound,
            if constants.is_empty() {
                "none".into()
            } else {
                constants.join(" ")
            }
        ),
    }
}

pub fn validate(r: &ValidateReport, format: Format) -> String {
    let header = ["index", "size", "violations"];
    let rows = r
        .members
        .iter()
        .map(|m| {
            vec![
                m.index.to_string(),
                m.size.map_or_else(|| "-".into(), |s| s.to_string()),
                m.violations.join("; "),
            ]
        })
        .collect();
    match format {
        Format::Json => json(r),
        Format::Csv => csv_text(&header, rows),
        Format::Table => {
            let mut out = table(&header, rows);
            let _ = writeln!(out, "valid: {}", yes(r.valid));
            out
        }
    }
}

pub fn failure(command: &str, error: &str, format: Format) -> String {
    match format {
        Format::Json => json(&FailureReport {
            command,
            status: "failure",
            error,
        }),
        Format::Csv => csv_text(
            &["command", "error"],
            vec![vec![command.into(), error.into()]],
        ),
        Format::Table => format!("{command} failed: {error}\n"),
    }
}
