//! Deterministic rejection sampling of admissible rational points.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::Identity;
use crate::error::EvalError;
use crate::expr::Assignment;
use crate::scalar::{ExactScalar, Scalar};

/// How many points to draw and from where.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub trials: usize,
    pub n_values: Vec<u32>,
    /// Bound on `|p|` and `|r|` for sampled rationals `p/r`.
    pub height_bound: u32,
    pub max_rejections: usize,
    /// Wall-time budget per identity; trials not started before it runs
    /// out are skipped.
    pub budget: Option<std::time::Duration>,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan { seed: 0, trials: 50, n_values: (0..=6).collect(), height_bound: 16, max_rejections: 10_000, budget: None }
    }
}

impl SamplePlan {
    pub fn with_seed(seed: u64) -> Self {
        SamplePlan { seed, ..SamplePlan::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("no admissible point for `{identity}` after {rejections} rejections")]
    SamplingExhausted { identity: String, rejections: usize },
    #[error("evaluating guards of `{identity}`: {source}")]
    Eval { identity: String, source: EvalError },
}

/// One sampled parameter point, valid for every `n` of the plan.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoint {
    pub values: BTreeMap<String, ExactScalar>,
    pub q: ExactScalar,
    pub z: Option<ExactScalar>,
    /// Points discarded before this one was accepted.
    pub rejections: usize,
}

impl SamplePoint {
    /// The assignment at degree `n`; solved parameters are included with
    /// their values at this `n`.
    pub fn at(&self, ident: &Identity, n: u32) -> Result<Assignment<ExactScalar>, EvalError> {
        let mut a = self.assignment(n);
        for (name, value) in &ident.solved {
            let v = value.eval(&a)?;
            a.values.insert(name.clone(), v);
        }
        Ok(a)
    }

    /// The sampled values only.
    pub fn assignment(&self, n: u32) -> Assignment<ExactScalar> {
        Assignment { values: self.values.clone(), q: self.q.clone(), z: self.z.clone(), n }
    }

    /// `name=value` strings in a stable order, for reports.
    pub fn describe(&self, ident: &Identity, n: u32) -> BTreeMap<String, String> {
        let a = self.at(ident, n).unwrap_or_else(|_| self.assignment(n));
        let mut out: BTreeMap<String, String> = a.values.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
        out.insert("q".into(), a.q.to_string());
        if let Some(z) = &a.z {
            out.insert("z".into(), z.to_string());
        }
        out.insert("n".into(), n.to_string());
        out
    }
}

/// FNV-1a over the seed, identity id and trial index.
fn stream_seed(seed: u64, id: &str, trial: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let bytes = seed.to_le_bytes().into_iter().chain(id.bytes()).chain((trial as u64).to_le_bytes());
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn rational(rng: &mut ChaCha8Rng, bound: i64) -> ExactScalar {
    loop {
        let p = rng.gen_range(-bound..=bound);
        if p != 0 {
            return ExactScalar::ratio(p, rng.gen_range(1..=bound));
        }
    }
}

fn base(rng: &mut ChaCha8Rng, bound: i64, inside_disk: bool) -> ExactScalar {
    loop {
        let q = rational(rng, bound);
        match q.modulus_cmp_one() {
            Ordering::Equal => continue,
            Ordering::Greater if inside_disk => continue,
            _ => return q,
        }
    }
}

/// Draws the point for `trial`: nonzero rationals of bounded height, `|q| ≠ 1`
/// (and `|q| < 1` when a member needs convergent infinite products), resampled
/// until every guard of every member and the closed form passes at every `n`
/// of the plan. Deterministic in `(plan.seed, ident.id, trial)`.
pub fn sample_point(ident: &Identity, plan: &SamplePlan, trial: usize) -> Result<SamplePoint, SampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(plan.seed, &ident.id, trial));
    let bound = i64::from(plan.height_bound.max(1));
    let inside_disk = ident.has_float_only();
    let eval_err = |source| SampleError::Eval { identity: ident.id.clone(), source };
    for rejections in 0..=plan.max_rejections {
        let q = base(&mut rng, bound.max(2), inside_disk);
        let values: BTreeMap<String, ExactScalar> =
            ident.params.iter().map(|p| (p.clone(), rational(&mut rng, bound))).collect();
        let z = ident.uses_z.then(|| rational(&mut rng, bound));
        let point = SamplePoint { values, q, z, rejections };
        let mut ok = true;
        for &n in &plan.n_values {
            let a = match point.at(ident, n) {
                Ok(a) => a,
                Err(e) if e.is_inadmissible() => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(eval_err(e)),
            };
            // float-only members are guarded in floats
            let mut violations = Vec::new();
            for g in &ident.guards {
                violations.extend(g.check(&a).map_err(eval_err)?);
            }
            for e in ident.members.iter().map(|m| &m.expr).chain(&ident.closed_form) {
                let v = if e.is_float_only() {
                    crate::expr::expr_guards(e, &a.to_float())
                } else {
                    crate::expr::expr_guards(e, &a)
                };
                match v {
                    Ok(v) => violations.extend(v),
                    Err(e) if e.is_inadmissible() => violations.push(crate::Violation::Pole(e.to_string())),
                    Err(e) => return Err(eval_err(e)),
                }
            }
            if !violations.is_empty() {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(point);
        }
    }
    Err(SampleError::SamplingExhausted { identity: ident.id.clone(), rejections: plan.max_rejections })
}
