//! Report rendering. JSON reports carry `schema_version`; keys appear in
//! struct field order, so identical runs give identical bytes once the
//! timestamp and wall times are switched off.

use std::io::Write;
use std::time::SystemTime;

use anyhow::Result;
use clap::ValueEnum;
use serde::Serialize;

use qaskey::corpus::scheme::{EdgeReport, SchemeGraph};
use qaskey::corpus::{Counterexample, Identity, SamplePlan, VerificationReport};
use qaskey::Mode;

use crate::Config;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Fields common to every JSON report.
pub struct Meta {
    pub timestamp: Option<String>,
}

impl Meta {
    pub fn new(no_timestamp: bool) -> Self {
        Meta { timestamp: (!no_timestamp).then(|| humantime::format_rfc3339_seconds(SystemTime::now()).to_string()) }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<&'a str>,
    #[serde(flatten)]
    body: T,
}

fn write_json<T: Serialize>(out: &mut dyn Write, meta: &Meta, command: &'static str, body: T) -> Result<()> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        tool: "qaskey",
        version: env!("CARGO_PKG_VERSION"),
        command,
        timestamp: meta.timestamp.as_deref(),
        body,
    };
    serde_json::to_writer_pretty(&mut *out, &env)?;
    writeln!(out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// list

#[derive(Serialize)]
struct ListEntry<'a> {
    id: &'a str,
    kind: String,
    members: usize,
    templates: usize,
    summation: bool,
    reference: &'a str,
    file: &'a str,
    line: usize,
}

fn list_entry(i: &Identity) -> ListEntry<'_> {
    ListEntry {
        id: &i.id,
        kind: i.kind.to_string(),
        members: i.members.len(),
        templates: i.templates.len(),
        summation: i.closed_form.is_some(),
        reference: &i.reference,
        file: &i.file,
        line: i.line,
    }
}

pub fn write_list(out: &mut dyn Write, format: Format, meta: &Meta, idents: &[&Identity]) -> Result<()> {
    let entries: Vec<ListEntry> = idents.iter().map(|i| list_entry(i)).collect();
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                count: usize,
                identities: &'a [ListEntry<'a>],
            }
            write_json(out, meta, "list", Body { count: entries.len(), identities: &entries })
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if entries.is_empty() {
                w.write_record(["id", "kind", "members", "templates", "summation", "reference", "file", "line"])?;
            }
            for e in &entries {
                w.serialize(e)?;
            }
            w.flush()?;
            Ok(())
        }
        Format::Text => {
            for e in &entries {
                writeln!(out, "{:<20} {:<12} {:>3} members  {}", e.id, e.kind, e.members, e.reference)?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// verify

#[derive(Serialize)]
pub struct RunConfig {
    seed: u64,
    trials: usize,
    mode: Mode,
    n_max: u32,
    height_bound: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget_seconds: Option<f64>,
}

pub fn config_of(cfg: &Config, plan: &SamplePlan) -> RunConfig {
    RunConfig {
        seed: plan.seed,
        trials: plan.trials,
        mode: cfg.mode.into(),
        n_max: cfg.n_max,
        height_bound: plan.height_bound,
        budget_seconds: cfg.budget,
    }
}

#[derive(Serialize)]
struct VerifyEntry<'a> {
    identity_id: &'a str,
    kind: String,
    passed: bool,
    members: usize,
    trials_run: usize,
    trials_passed: usize,
    trials_skipped: usize,
    rejections: usize,
    max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time: Option<f64>,
    counterexamples: &'a [Counterexample],
}

#[derive(Serialize)]
struct VerifyError<'a> {
    identity_id: &'a str,
    error: &'a str,
}

#[derive(Serialize)]
struct Summary {
    identities: usize,
    passed: usize,
    failed: usize,
    errors: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time: Option<f64>,
}

#[derive(Serialize)]
struct CsvVerifyRow<'a> {
    identity_id: &'a str,
    kind: String,
    passed: bool,
    members: usize,
    trials_run: usize,
    trials_passed: usize,
    trials_skipped: usize,
    rejections: usize,
    max_residual: Option<f64>,
    counterexamples: usize,
    wall_time: Option<f64>,
    error: &'a str,
}

pub fn write_verify(
    out: &mut dyn Write,
    format: Format,
    meta: &Meta,
    config: &RunConfig,
    reports: &[(&Identity, VerificationReport)],
    errors: &[(String, String)],
    total_time: Option<f64>,
) -> Result<()> {
    let entries: Vec<VerifyEntry> = reports
        .iter()
        .map(|(i, r)| VerifyEntry {
            identity_id: &r.identity_id,
            kind: i.kind.to_string(),
            passed: r.passed() && !r.budget_exceeded(),
            members: r.members,
            trials_run: r.trials_run,
            trials_passed: r.trials_passed,
            trials_skipped: r.trials_skipped,
            rejections: r.rejections,
            max_residual: r.max_residual,
            wall_time: r.wall_time,
            counterexamples: &r.counterexamples,
        })
        .collect();
    let passed = entries.iter().filter(|e| e.passed).count();
    let summary = Summary {
        identities: entries.len() + errors.len(),
        passed,
        failed: entries.len() - passed,
        errors: errors.len(),
        wall_time: total_time,
    };
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                config: &'a RunConfig,
                summary: Summary,
                results: Vec<VerifyEntry<'a>>,
                errors: Vec<VerifyError<'a>>,
            }
            let errors = errors.iter().map(|(id, e)| VerifyError { identity_id: id, error: e }).collect();
            write_json(out, meta, "verify", Body { config, summary, results: entries, errors })
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for e in &entries {
                w.serialize(CsvVerifyRow {
                    identity_id: e.identity_id,
                    kind: e.kind.clone(),
                    passed: e.passed,
                    members: e.members,
                    trials_run: e.trials_run,
                    trials_passed: e.trials_passed,
                    trials_skipped: e.trials_skipped,
                    rejections: e.rejections,
                    max_residual: e.max_residual,
                    counterexamples: e.counterexamples.len(),
                    wall_time: e.wall_time,
                    error: "",
                })?;
            }
            for (id, err) in errors {
                w.serialize(CsvVerifyRow {
                    identity_id: id,
                    kind: String::new(),
                    passed: false,
                    members: 0,
                    trials_run: 0,
                    trials_passed: 0,
                    trials_skipped: 0,
                    rejections: 0,
                    max_residual: None,
                    counterexamples: 0,
                    wall_time: None,
                    error: err,
                })?;
            }
            w.flush()?;
            Ok(())
        }
        Format::Text => {
            for e in &entries {
                let status = if e.passed { "PASS" } else { "FAIL" };
                write!(
                    out,
                    "{status}  {:<20} {:<12} {:>3} members  {}/{} trials",
                    e.identity_id, e.kind, e.members, e.trials_passed, e.trials_run
                )?;
                if e.trials_skipped > 0 {
                    write!(out, "  ({} skipped: budget exceeded)", e.trials_skipped)?;
                }
                if let Some(r) = e.max_residual {
                    write!(out, "  max residual {r:.2e}")?;
                }
                if let Some(t) = e.wall_time {
                    write!(out, "  {t:.2}s")?;
                }
                writeln!(out)?;
                if let Some(c) = e.counterexamples.first() {
                    let point: Vec<String> = c.assignment.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    writeln!(out, "      trial {} at {}", c.trial, point.join(" "))?;
                    writeln!(out, "      {} = {}", c.member_i, c.lhs)?;
                    writeln!(out, "      {} = {}", c.member_j, c.rhs)?;
                }
            }
            for (id, err) in errors {
                writeln!(out, "ERROR {id:<20} {err}")?;
            }
            write!(out, "{} passed, {} failed, {} errors", summary.passed, summary.failed, summary.errors)?;
            if let Some(t) = total_time {
                write!(out, " in {t:.2}s")?;
            }
            writeln!(out)?;
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// eval

#[derive(Serialize)]
struct EvalRow<'a> {
    target: &'a str,
    kind: &'a str,
    mode: Mode,
    value: &'a str,
}

pub fn write_eval(out: &mut dyn Write, format: Format, meta: &Meta, kind: &str, target: &str, mode: Mode, value: &str) -> Result<()> {
    let row = EvalRow { target, kind, mode, value };
    match format {
        Format::Json => write_json(out, meta, "eval", row),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.serialize(row)?;
            w.flush()?;
            Ok(())
        }
        Format::Text => {
            writeln!(out, "{value}")?;
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// scheme

#[derive(Serialize)]
struct CsvEdgeRow<'a> {
    source: &'a str,
    target: &'a str,
    label: &'a str,
    rescale: String,
    seed: Option<u64>,
    final_error: Option<f64>,
    rate: Option<f64>,
    rejections: Option<usize>,
    eventually_monotone: Option<bool>,
    converged: Option<bool>,
    error: Option<&'a str>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn write_scheme(out: &mut dyn Write, format: Format, meta: &Meta, graph: &SchemeGraph, limits: Option<&[EdgeReport]>) -> Result<()> {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                nodes: usize,
                edges: usize,
                graph: &'a SchemeGraph,
                dot: String,
                #[serde(skip_serializing_if = "Option::is_none")]
                limits: Option<&'a [EdgeReport]>,
            }
            let body = Body { nodes: graph.nodes.len(), edges: graph.edges.len(), graph, dot: graph.to_dot(), limits };
            write_json(out, meta, "scheme", body)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for e in &graph.edges {
                let report = limits.and_then(|ls| ls.iter().find(|r| r.source == e.source && r.target == e.target));
                w.serialize(CsvEdgeRow {
                    source: &e.source,
                    target: &e.target,
                    label: &e.label,
                    rescale: e.rescale.as_ref().map(ToString::to_string).unwrap_or_default(),
                    seed: report.map(|r| r.seed),
                    final_error: report.and_then(|r| finite(r.final_error)),
                    rate: report.and_then(|r| finite(r.rate)),
                    rejections: report.map(|r| r.rejections),
                    eventually_monotone: report.map(|r| r.eventually_monotone),
                    converged: report.map(|r| r.converged),
                    error: report.and_then(|r| r.error.as_deref()),
                })?;
            }
            w.flush()?;
            Ok(())
        }
        Format::Text => {
            out.write_all(graph.to_dot().as_bytes())?;
            if let Some(limits) = limits {
                // the table is emitted as DOT comments so the output stays valid DOT
                writeln!(out, "// {:<14} {:<14} {:<5} {:>11} {:>6}  {}", "source", "target", "edge", "final error", "rate", "status")?;
                for r in limits {
                    let status = match (&r.error, r.converged) {
                        (Some(e), _) => format!("error: {e}"),
                        (None, true) => "converged".to_string(),
                        (None, false) if r.eventually_monotone => "decreasing, above tolerance".to_string(),
                        (None, false) => "not monotone".to_string(),
                    };
                    let rate = finite(r.rate).map_or("-".to_string(), |x| format!("{x:.2}"));
                    writeln!(
                        out,
                        "// {:<14} {:<14} {:<5} {:>11.3e} {rate:>6}  {status}",
                        r.source, r.target, r.label, r.final_error
                    )?;
                }
                let converged = limits.iter().filter(|r| r.converged).count();
                writeln!(out, "// {converged}/{} edges converged", limits.len())?;
            }
            Ok(())
        }
    }
}
