//! The limit scheme connecting the families: nodes, labelled edges, DOT
//! output and a numerical convergence check along a parameter ladder.
//!
//! The graph carries the Askey–Wilson node as a stub with its two outgoing
//! edges; it has no representations, so those edges are drawn but never
//! checked.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::expr::{Assignment, Monomial};
use crate::polys::{eval_node, limit_edges, Direction, FamilyId, FamilyPoint, PolyError};
use crate::scalar::{ExactScalar, Scalar};

pub const ASKEY_WILSON: &str = "AskeyWilson";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeNode {
    pub id: String,
    pub label: String,
    /// `None` for the Askey–Wilson stub.
    pub family: Option<FamilyId>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeEdge {
    pub source: String,
    pub target: String,
    /// e.g. `c→∞`
    pub label: String,
    pub direction: Direction,
    /// `None` on stub edges.
    #[serde(serialize_with = "ser_rescale")]
    pub rescale: Option<Monomial>,
}

fn ser_rescale<S: serde::Serializer>(m: &Option<Monomial>, s: S) -> Result<S::Ok, S::Error> {
    match m {
        Some(m) => s.serialize_some(&m.to_string()),
        None => s.serialize_none(),
    }
}

impl SchemeEdge {
    pub fn is_stub(&self) -> bool {
        self.rescale.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeGraph {
    pub nodes: Vec<SchemeNode>,
    pub edges: Vec<SchemeEdge>,
}

impl SchemeGraph {
    /// Nodes backed by an implemented family.
    pub fn family_nodes(&self) -> impl Iterator<Item = &SchemeNode> {
        self.nodes.iter().filter(|n| n.family.is_some())
    }

    /// Edges between implemented families.
    pub fn family_edges(&self) -> impl Iterator<Item = &SchemeEdge> {
        self.edges.iter().filter(|e| !e.is_stub())
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph scheme {\n  rankdir=TB;\n  node [shape=box];\n");
        for n in &self.nodes {
            let style = if n.family.is_none() { ", style=dashed" } else { "" };
            let _ = writeln!(out, "  {} [label=\"{}\"{style}];", n.id, n.label);
        }
        for e in &self.edges {
            let _ = writeln!(out, "  {} -> {} [label=\"{}\"];", e.source, e.target, e.label);
        }
        out.push_str("}\n");
        out
    }
}

/// The scheme: the Askey–Wilson stub, the fourteen families and the twenty
/// labelled limit edges.
pub fn scheme_graph() -> SchemeGraph {
    let mut nodes = vec![SchemeNode { id: ASKEY_WILSON.into(), label: "Askey-Wilson".into(), family: None }];
    nodes.extend(
        FamilyId::ALL.into_iter().map(|f| SchemeNode { id: f.name().into(), label: f.title().into(), family: Some(f) }),
    );
    let mut edges = vec![
        SchemeEdge {
            source: ASKEY_WILSON.into(),
            target: FamilyId::CDqHahn.name().into(),
            label: "f→0".into(),
            direction: Direction::ToZero,
            rescale: None,
        },
        SchemeEdge {
            source: ASKEY_WILSON.into(),
            target: FamilyId::CDqInvHahn.name().into(),
            label: "f→∞".into(),
            direction: Direction::ToInfinity,
            rescale: None,
        },
    ];
    edges.extend(limit_edges().into_iter().map(|e| SchemeEdge {
        source: e.source.name().into(),
        target: e.target.name().into(),
        label: format!("{}{}", e.source.limit_letter(), e.direction),
        direction: e.direction,
        rescale: Some(e.rescale),
    }));
    SchemeGraph { nodes, edges }
}

// ---------------------------------------------------------------------------
// Ladder check
// ---------------------------------------------------------------------------

/// Convergence of one edge along the ladder at one sample point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeReport {
    pub source: String,
    pub target: String,
    pub label: String,
    pub seed: u64,
    /// `|rescale · source − target|`, maximized over the checked degrees,
    /// one entry per ladder rung.
    pub errors: Vec<f64>,
    pub final_error: f64,
    /// `log2` of the ratio of the last two errors: about 1 for errors of
    /// order `1/λ`.
    pub rate: f64,
    /// Sample points discarded because some rung was inadmissible.
    pub rejections: usize,
    /// The error sequence is non-increasing from some rung on.
    pub eventually_monotone: bool,
    pub converged: bool,
    pub error: Option<String>,
}

/// Final error a converged edge must reach.
pub const LIMIT_TOL: f64 = 1e-6;

/// Degrees checked along each edge.
pub const LIMIT_DEGREES: std::ops::RangeInclusive<u32> = 0..=3;

/// Points drawn per edge before giving up on finding an admissible one.
const MAX_EDGE_DRAWS: usize = 64;

/// `2^lo, 2^(lo+1), …, 2^hi`.
pub fn power_ladder(lo: u32, hi: u32) -> Vec<ExactScalar> {
    (lo..=hi).map(|k| ExactScalar::real(num_rational::BigRational::from_integer(num_bigint::BigInt::from(1) << k))).collect()
}

fn small_rational(rng: &mut ChaCha8Rng, bound: i64) -> ExactScalar {
    loop {
        let p = rng.gen_range(-bound..=bound);
        let r = rng.gen_range(1..=bound);
        let v = ExactScalar::ratio(p, r);
        if p != 0 && v.modulus_cmp_one().is_ne() {
            return v;
        }
    }
}

/// A sample point for the edge check: node parameters and `z` of height at
/// most 4, `q` inside the unit disk.
fn edge_point(rng: &mut ChaCha8Rng, source: FamilyId) -> (Vec<ExactScalar>, ExactScalar, ExactScalar) {
    let params = (0..source.arity()).map(|_| small_rational(rng, 4)).collect();
    let z = small_rational(rng, 4);
    let q = loop {
        let q = small_rational(rng, 4);
        if q.modulus_cmp_one().is_lt() {
            break q;
        }
    };
    (params, z, q)
}

fn edge_error(
    source: FamilyId,
    target: FamilyId,
    rescale: &Monomial,
    params: &[ExactScalar],
    lambda: &ExactScalar,
    direction: Direction,
    z: &ExactScalar,
    q: &ExactScalar,
) -> Result<f64, PolyError> {
    let value = match direction {
        Direction::ToInfinity => lambda.clone(),
        Direction::ToZero => lambda.inv().expect("ladder rungs are nonzero"),
    };
    let mut full = params.to_vec();
    let last = full.len() - 1;
    full[last] = value;
    let remaining = full[..last].to_vec();
    let mut worst: f64 = 0.0;
    for n in LIMIT_DEGREES {
        let src = eval_node(source, &FamilyPoint::new(full.clone(), z.clone(), q.clone(), n))?;
        let tgt = eval_node(target, &FamilyPoint::new(remaining.clone(), z.clone(), q.clone(), n))?;
        let mut a = Assignment::new(q.clone(), n);
        for (name, v) in source.param_names().iter().zip(&full) {
            a = a.with(name, v.clone());
        }
        let scale = rescale.eval(&a).map_err(|e| PolyError::Inadmissible {
            family: source,
            label: "rescale".into(),
            reason: e,
        })?;
        worst = worst.max(scale.mul(&src).sub(&tgt).to_float().abs());
    }
    Ok(worst)
}

fn eventually_monotone(errors: &[f64]) -> bool {
    // the last two rungs must already be non-increasing
    errors.len() < 2 || errors[errors.len() - 1] <= errors[errors.len() - 2]
}

/// Runs every implemented edge along `ladder` at a point drawn from
/// `seed`, redrawing points at which some rung is inadmissible. Evaluation
/// is exact; errors are reported in floats.
pub fn check_limits(ladder: &[ExactScalar], seed: u64) -> Vec<EdgeReport> {
    let graph = scheme_graph();
    let labels: Vec<String> = graph.family_edges().map(|e| e.label.clone()).collect();
    limit_edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ i as u64);
            let mut report = EdgeReport {
                source: e.source.name().into(),
                target: e.target.name().into(),
                label: labels[i].clone(),
                seed,
                errors: Vec::new(),
                final_error: f64::NAN,
                rate: f64::NAN,
                rejections: 0,
                eventually_monotone: false,
                converged: false,
                error: None,
            };
            let mut last_error = None;
            for draw in 0..MAX_EDGE_DRAWS {
                let (params, z, q) = edge_point(&mut rng, e.source);
                let errors: Result<Vec<f64>, PolyError> = ladder
                    .iter()
                    .map(|lambda| edge_error(e.source, e.target, &e.rescale, &params, lambda, e.direction, &z, &q))
                    .collect();
                match errors {
                    Ok(errors) => {
                        report.rejections = draw;
                        report.errors = errors;
                        break;
                    }
                    Err(err) => last_error = Some(err.to_string()),
                }
            }
            if report.errors.is_empty() && !ladder.is_empty() {
                report.rejections = MAX_EDGE_DRAWS;
                report.error = last_error;
                return report;
            }
            let k = report.errors.len();
            report.final_error = report.errors.last().copied().unwrap_or(f64::NAN);
            if k >= 2 {
                report.rate = (report.errors[k - 2] / report.errors[k - 1]).log2();
            }
            report.eventually_monotone = eventually_monotone(&report.errors);
            report.converged = report.eventually_monotone && report.final_error < LIMIT_TOL;
            report
        })
        .collect()
}

/// The graph and, when asked, the per-edge ladder reports.
pub fn scheme(check: bool, ladder: &[ExactScalar], seed: u64) -> (SchemeGraph, Option<Vec<EdgeReport>>) {
    (scheme_graph(), check.then(|| check_limits(ladder, seed)))
}
