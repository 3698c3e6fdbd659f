//! Pointwise verification of identities, corpus mutation, and the structural
//! check of documented parameter substitutions.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::sample::{sample_point, SampleError, SamplePlan, SamplePoint};
use super::{Identity, Remark};
use crate::error::EvalError;
use crate::expr::{eval_expr, Affine, Assignment, Expr, Monomial, SeriesTemplate};
use crate::scalar::{approx_eq, relative_residual, ExactScalar, FloatScalar, Mode, Scalar};

/// Relative tolerance for float comparisons.
pub const FLOAT_REL_TOL: f64 = 1e-10;

/// One disagreement between two members (or a member and the closed form).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub assignment: BTreeMap<String, String>,
    pub member_i: String,
    pub member_j: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub identity_id: String,
    pub mode: Mode,
    pub members: usize,
    pub trials_run: usize,
    pub trials_passed: usize,
    /// Trials skipped because the wall-time budget ran out.
    pub trials_skipped: usize,
    pub rejections: usize,
    /// Largest scaled residual over float comparisons, if any were made.
    pub max_residual: Option<f64>,
    pub counterexamples: Vec<Counterexample>,
    /// Seconds; omitted from deterministic reports.
    pub wall_time: Option<f64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty() && self.trials_passed == self.trials_run
    }

    pub fn budget_exceeded(&self) -> bool {
        self.trials_skipped > 0
    }
}

enum Value {
    Exact(ExactScalar),
    Float(FloatScalar),
}

impl Value {
    fn text(&self) -> String {
        match self {
            Value::Exact(v) => v.to_string(),
            Value::Float(v) => format!("{v}"),
        }
    }

    fn float(&self) -> FloatScalar {
        match self {
            Value::Exact(v) => v.to_float(),
            Value::Float(v) => *v,
        }
    }
}

fn evaluate(e: &Expr, a: &Assignment<ExactScalar>, mode: Mode) -> Result<Value, EvalError> {
    if mode == Mode::Exact && !e.is_float_only() {
        eval_expr(e, a).map(Value::Exact)
    } else {
        eval_expr(e, &a.to_float()).map(Value::Float)
    }
}

/// Compares two values; returns (equal, residual if compared in floats).
fn agree(x: &Value, y: &Value) -> (bool, Option<f64>) {
    match (x, y) {
        (Value::Exact(a), Value::Exact(b)) => (a == b, None),
        _ => {
            let (a, b) = (x.float(), y.float());
            (approx_eq(&a, &b, FLOAT_REL_TOL), Some(relative_residual(&a, &b)))
        }
    }
}

struct TrialOutcome {
    rejections: usize,
    counterexample: Option<Counterexample>,
    max_residual: Option<f64>,
}

fn run_trial(ident: &Identity, point: &SamplePoint, plan: &SamplePlan, mode: Mode, trial: usize) -> TrialOutcome {
    let mut max_residual: Option<f64> = None;
    for &n in &plan.n_values {
        let fail = |i: &str, j: &str, lhs: String, rhs: String| Counterexample {
            trial,
            assignment: point.describe(ident, n),
            member_i: i.to_string(),
            member_j: j.to_string(),
            lhs,
            rhs,
        };
        let a = match point.at(ident, n) {
            Ok(a) => a,
            Err(e) => {
                let c = fail("-", "-", String::new(), format!("error: {e}"));
                return TrialOutcome { rejections: point.rejections, counterexample: Some(c), max_residual };
            }
        };
        let first = &ident.members[0];
        let reference = match evaluate(&first.expr, &a, mode) {
            Ok(v) => v,
            Err(e) => {
                let c = fail(&first.label, &first.label, format!("error: {e}"), String::new());
                return TrialOutcome { rejections: point.rejections, counterexample: Some(c), max_residual };
            }
        };
        let others = ident.members[1..]
            .iter()
            .map(|m| (m.label.as_str(), &m.expr))
            .chain(ident.closed_form.as_ref().map(|c| ("closed form", c)));
        for (label, e) in others {
            let outcome = match evaluate(e, &a, mode) {
                Ok(v) => {
                    let (ok, r) = agree(&reference, &v);
                    if let Some(r) = r {
                        max_residual = Some(max_residual.map_or(r, |m: f64| m.max(r)));
                    }
                    (!ok).then(|| fail(&first.label, label, reference.text(), v.text()))
                }
                Err(err) => Some(fail(&first.label, label, reference.text(), format!("error: {err}"))),
            };
            if outcome.is_some() {
                return TrialOutcome { rejections: point.rejections, counterexample: outcome, max_residual };
            }
        }
    }
    TrialOutcome { rejections: point.rejections, counterexample: None, max_residual }
}

/// Evaluates every member (and the closed form) at `plan.trials` sampled
/// points for each `n` in the plan. Exact mode demands equality in the
/// exact field; members that involve infinite products are compared in
/// floats. Trials run in parallel and are collected in trial order, so the
/// report does not depend on scheduling (except for which trials a
/// wall-time budget cuts off).
pub fn verify(ident: &Identity, plan: &SamplePlan, mode: Mode) -> Result<VerificationReport, SampleError> {
    let start = Instant::now();
    let out_of_time = || plan.budget.is_some_and(|b| start.elapsed() > b);
    let outcomes: Vec<Option<Result<TrialOutcome, SampleError>>> = (0..plan.trials)
        .into_par_iter()
        .map(|t| {
            if out_of_time() {
                return None;
            }
            Some(sample_point(ident, plan, t).map(|p| run_trial(ident, &p, plan, mode, t)))
        })
        .collect();
    let mut report = VerificationReport {
        identity_id: ident.id.clone(),
        mode,
        members: ident.members.len(),
        trials_run: 0,
        trials_passed: 0,
        trials_skipped: 0,
        rejections: 0,
        max_residual: None,
        counterexamples: Vec::new(),
        wall_time: None,
    };
    for o in outcomes {
        let Some(o) = o else {
            report.trials_skipped += 1;
            continue;
        };
        let o = o?;
        report.trials_run += 1;
        report.rejections += o.rejections;
        if let Some(r) = o.max_residual {
            report.max_residual = Some(report.max_residual.map_or(r, |m| m.max(r)));
        }
        match o.counterexample {
            Some(c) => report.counterexamples.push(c),
            None => report.trials_passed += 1,
        }
    }
    report.wall_time = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

// ---------------------------------------------------------------------------
// Mutation
// ---------------------------------------------------------------------------

/// A single-token corruption applied to one member.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mutation {
    pub member: String,
    pub description: String,
}

/// A copy of `ident` with one member corrupted by a single-token edit:
/// the series argument or a Pochhammer argument multiplied by `q`, the
/// prefactor multiplied by `q`, or the zero count shifted by one. The choice
/// is deterministic in `seed`.
pub fn mutate(ident: &Identity, seed: u64) -> Option<(Identity, Mutation)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d75_7461_7465);
    let lo = usize::from(ident.members.len() > 1);
    let candidates: Vec<usize> = (lo..ident.members.len()).filter(|&i| !ident.members[i].expr.is_float_only()).collect();
    if candidates.is_empty() {
        return None;
    }
    let idx = candidates[rng.gen_range(0..candidates.len())];
    let mut out = ident.clone();
    let member = &mut out.members[idx];
    let e = &mut member.expr;
    let q = Monomial::q_pow(Affine::constant(1));
    let mut kinds = vec![0u8];
    if e.series.is_some() {
        kinds.extend([1, 3]);
    }
    if e.pochs.iter().any(|p| !p.args.is_empty()) {
        kinds.push(2);
    }
    let description = match kinds[rng.gen_range(0..kinds.len())] {
        1 => {
            let s = e.series.as_mut().unwrap();
            s.argument = s.argument.mul(&q);
            "series argument multiplied by q".to_string()
        }
        2 => {
            let with_args: Vec<usize> = (0..e.pochs.len()).filter(|&i| !e.pochs[i].args.is_empty()).collect();
            let p = &mut e.pochs[with_args[rng.gen_range(0..with_args.len())]];
            let k = rng.gen_range(0..p.args.len());
            p.args[k] = p.args[k].mul(&q);
            format!("Pochhammer argument {k} multiplied by q")
        }
        3 => {
            let s: &mut SeriesTemplate = e.series.as_mut().unwrap();
            let d = if rng.gen_bool(0.5) { 1 } else { -1 };
            s.zeros += d;
            format!("zero count shifted by {d}")
        }
        _ => {
            e.prefactor = e.prefactor.mul(&q);
            "prefactor multiplied by q".to_string()
        }
    };
    let label = member.label.clone();
    Some((out, Mutation { member: label, description }))
}

// ---------------------------------------------------------------------------
// Substitution remarks
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemarkCheck {
    pub remark_id: String,
    /// (source member, target member with the matching parameter order)
    pub matched: Vec<(String, String)>,
    pub unmatched: Vec<String>,
}

impl RemarkCheck {
    pub fn passed(&self) -> bool {
        self.unmatched.is_empty() && !self.matched.is_empty()
    }
}

fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

fn series_key(e: &Expr) -> Option<SeriesTemplate> {
    e.canonical().series
}

/// Checks that the remark's substitution carries the series of every
/// member of the source family onto the series of the target member under
/// some reordering of the permuted parameters.
pub fn check_remark(remark: &Remark, source: &Identity, target: &Expr) -> RemarkCheck {
    let mut targets = Vec::new();
    for perm in permutations(&remark.permute) {
        let map: BTreeMap<String, String> = remark.permute.iter().cloned().zip(perm.iter().cloned()).collect();
        targets.push((perm.join(","), series_key(&target.rename(&map))));
    }
    let mut check = RemarkCheck { remark_id: remark.id.clone(), matched: Vec::new(), unmatched: Vec::new() };
    for m in &source.members {
        let series_only = Expr { prefactor: Monomial::one(), pochs: Vec::new(), series: m.expr.series.clone() };
        let image = series_only.substitute(&remark.map).ok().and_then(|e| series_key(&e));
        match targets.iter().find(|(_, t)| image.is_some() && *t == image) {
            Some((order, _)) => check.matched.push((m.label.clone(), format!("{}@{order}", remark.target))),
            None => check.unmatched.push(m.label.clone()),
        }
    }
    check
}
