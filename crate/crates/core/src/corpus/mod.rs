//! The identity registry: corpus files parsed into [`Identity`] values, the
//! admissible-point sampler, the verifier, variant counting and the limit
//! scheme graph.

mod load;
mod sample;
pub mod scheme;
mod variants;
mod verify;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::Serialize;

pub use load::{parse_corpus, Corpus};
pub use sample::{sample_point, SampleError, SamplePlan, SamplePoint};
pub use variants::{enumerate_variants, VariantCount, VariantGroup};
pub use verify::{check_remark, mutate, verify, Counterexample, Mutation, RemarkCheck, VerificationReport};

use crate::error::{EvalError, Violation};
use crate::expr::{Affine, Assignment, Expr, Monomial};
use crate::qpoch::omega_index;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IdentityKind {
    Chain,
    Interchange,
    Summation,
}

impl fmt::Display for IdentityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IdentityKind::Chain => "chain",
            IdentityKind::Interchange => "interchange",
            IdentityKind::Summation => "summation",
        })
    }
}

impl FromStr for IdentityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chain" => Ok(IdentityKind::Chain),
            "interchange" => Ok(IdentityKind::Interchange),
            "summation" => Ok(IdentityKind::Summation),
            other => Err(format!("unknown identity kind `{other}`")),
        }
    }
}

/// An explicit admissibility condition attached to an identity.
#[derive(Clone, Debug, PartialEq)]
pub enum Guard {
    /// The two monomials take different values.
    Ne(Monomial, Monomial),
    NonZero(Monomial),
    /// The monomial avoids `Ω_q^len = {q^{-k} : 0 ≤ k < len}`.
    NotOmega(Monomial, Affine),
}

impl Guard {
    pub fn check<S: Scalar>(&self, a: &Assignment<S>) -> Result<Option<Violation>, EvalError> {
        Ok(match self {
            Guard::Ne(x, y) => (x.eval(a)? == y.eval(a)?).then(|| Violation::Pole(format!("{x} - {y}"))),
            Guard::NonZero(x) => x.eval(a)?.is_zero().then(|| Violation::Pole(x.to_string())),
            Guard::NotOmega(x, len) => {
                let len = len.at(a.n).max(0) as u32;
                omega_index(&x.eval(a)?, &a.q, len).map(|k| Violation::Pole(format!("{x} - q^-{k}")))
            }
        })
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> Guard {
        let sub: BTreeMap<String, Monomial> = map.iter().map(|(k, v)| (k.clone(), Monomial::param(v))).collect();
        let r = |m: &Monomial| m.substitute(&sub).expect("renaming keeps exponents affine");
        match self {
            Guard::Ne(x, y) => Guard::Ne(r(x), r(y)),
            Guard::NonZero(x) => Guard::NonZero(r(x)),
            Guard::NotOmega(x, l) => Guard::NotOmega(r(x), *l),
        }
    }
}

/// A labeled expression taking part in an identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub label: String,
    pub expr: Expr,
    /// Index of the unexpanded template this member came from.
    pub template: usize,
}

/// A named string of expressions asserted pairwise equal.
#[derive(Clone, Debug, PartialEq)]
pub struct Identity {
    pub id: String,
    pub kind: IdentityKind,
    pub reference: String,
    pub quote: String,
    pub file: String,
    pub line: usize,
    /// Members as written, before role expansion and constraint solving.
    pub templates: Vec<Member>,
    /// Members after role expansion and constraint solving.
    pub members: Vec<Member>,
    pub closed_form: Option<Expr>,
    pub guards: Vec<Guard>,
    /// Parameters fixed by a constraint, with their solved values.
    pub solved: Vec<(String, Monomial)>,
    /// Sampled parameters (excluding `q`, `z` and solved parameters).
    pub params: Vec<String>,
    pub uses_z: bool,
}

impl Identity {
    pub fn member(&self, label: &str) -> Option<&Member> {
        self.members.iter().find(|m| m.label == label)
    }

    pub fn template(&self, label: &str) -> Option<&Member> {
        self.templates.iter().find(|m| m.label == label)
    }

    /// True if some member or the closed form can only be evaluated in floats.
    pub fn has_float_only(&self) -> bool {
        self.members.iter().any(|m| m.expr.is_float_only())
    }

    /// Every explicit and structural guard violated at `a`.
    pub fn violations<S: Scalar>(&self, a: &Assignment<S>) -> Result<Vec<Violation>, EvalError> {
        let mut out = Vec::new();
        for g in &self.guards {
            out.extend(g.check(a)?);
        }
        for e in self.members.iter().map(|m| &m.expr).chain(&self.closed_form) {
            out.extend(crate::expr::expr_guards(e, a)?);
        }
        Ok(out)
    }
}

/// A documented substitution carrying one interchange family onto forms of
/// a member of another identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Remark {
    pub id: String,
    pub source: String,
    pub target: String,
    pub permute: Vec<String>,
    pub map: BTreeMap<String, Monomial>,
    pub file: String,
    pub line: usize,
}

const CORPUS_FILES: [(&str, &str); 5] = [
    ("basics.qk", include_str!("../../corpus/basics.qk")),
    ("dual_hahn.qk", include_str!("../../corpus/dual_hahn.qk")),
    ("al_salam_chihara.qk", include_str!("../../corpus/al_salam_chihara.qk")),
    ("big_hermite.qk", include_str!("../../corpus/big_hermite.qk")),
    ("hermite.qk", include_str!("../../corpus/hermite.qk")),
];

/// The corpus shipped with the crate, parsed once.
pub fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut out = Corpus::default();
        for (name, text) in CORPUS_FILES {
            let part = parse_corpus(name, text).unwrap_or_else(|e| panic!("bundled corpus is malformed: {e}"));
            out.extend(part).unwrap_or_else(|e| panic!("bundled corpus is malformed: {e}"));
        }
        out.validate().unwrap_or_else(|e| panic!("bundled corpus is malformed: {e}"));
        out
    })
}

/// All registered identities in file order.
pub fn registry() -> &'static [Identity] {
    &corpus().identities
}

pub fn lookup(id: &str) -> Option<&'static Identity> {
    registry().iter().find(|i| i.id == id)
}
