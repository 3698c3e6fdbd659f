//! The eight symmetric polynomial families and the six degenerate limit
//! functions, each backed by its list of representations from the corpus.
//!
//! A family's representations are the members of its chain identity in
//! display order. Statements that depend on distinguished parameters are
//! expanded into every role assignment at load; [`Representation::expr`] is
//! the assignment that keeps the parameters in their natural order and
//! [`Representation::variants`] holds all of them.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{lookup, Identity, Member};
use crate::error::{EvalError, Violation};
use crate::expr::{eval_expr, expr_guards, parse_monomial, Assignment, Expr, Monomial};
use crate::scalar::{FloatScalar, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FamilyId {
    CDqHahn,
    CDqInvHahn,
    ASC,
    ASCqInv,
    CBqHermite,
    CBqInvHermite,
    CqHermite,
    CqInvHermite,
    Xn,
    YnMinus,
    YnPlus,
    ZnMinus,
    Zn,
    ZnPlus,
}

impl FamilyId {
    pub const ALL: [FamilyId; 14] = [
        FamilyId::CDqHahn,
        FamilyId::CDqInvHahn,
        FamilyId::ASC,
        FamilyId::ASCqInv,
        FamilyId::CBqHermite,
        FamilyId::CBqInvHermite,
        FamilyId::CqHermite,
        FamilyId::CqInvHermite,
        FamilyId::Xn,
        FamilyId::YnMinus,
        FamilyId::YnPlus,
        FamilyId::ZnMinus,
        FamilyId::Zn,
        FamilyId::ZnPlus,
    ];

    /// The eight polynomial families.
    pub const POLYNOMIALS: [FamilyId; 8] = [
        FamilyId::CDqHahn,
        FamilyId::CDqInvHahn,
        FamilyId::ASC,
        FamilyId::ASCqInv,
        FamilyId::CBqHermite,
        FamilyId::CBqInvHermite,
        FamilyId::CqHermite,
        FamilyId::CqInvHermite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::CDqHahn => "CDqHahn",
            FamilyId::CDqInvHahn => "CDqInvHahn",
            FamilyId::ASC => "ASC",
            FamilyId::ASCqInv => "ASCqInv",
            FamilyId::CBqHermite => "CBqHermite",
            FamilyId::CBqInvHermite => "CBqInvHermite",
            FamilyId::CqHermite => "CqHermite",
            FamilyId::CqInvHermite => "CqInvHermite",
            FamilyId::Xn => "Xn",
            FamilyId::YnMinus => "YnMinus",
            FamilyId::YnPlus => "YnPlus",
            FamilyId::ZnMinus => "ZnMinus",
            FamilyId::Zn => "Zn",
            FamilyId::ZnPlus => "ZnPlus",
        }
    }

    /// Human-readable title used in graph output.
    pub fn title(self) -> &'static str {
        match self {
            FamilyId::CDqHahn => "continuous dual q-Hahn",
            FamilyId::CDqInvHahn => "continuous dual q^-1-Hahn",
            FamilyId::ASC => "Al-Salam-Chihara",
            FamilyId::ASCqInv => "q^-1-Al-Salam-Chihara",
            FamilyId::CBqHermite => "continuous big q-Hermite",
            FamilyId::CBqInvHermite => "continuous big q^-1-Hermite",
            FamilyId::CqHermite => "continuous q-Hermite",
            FamilyId::CqInvHermite => "continuous q^-1-Hermite",
            FamilyId::Xn => "X_n",
            FamilyId::YnMinus => "Y_n^-",
            FamilyId::YnPlus => "Y_n^+",
            FamilyId::ZnMinus => "Z_n^-",
            FamilyId::Zn => "Z_n",
            FamilyId::ZnPlus => "Z_n^+",
        }
    }

    pub fn arity(self) -> usize {
        self.param_names().len()
    }

    /// Parameter names used by the family's expressions, in order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FamilyId::CDqHahn | FamilyId::CDqInvHahn => &["a1", "a2", "a3"],
            FamilyId::ASC | FamilyId::ASCqInv | FamilyId::Xn => &["a1", "a2"],
            FamilyId::CBqHermite | FamilyId::CBqInvHermite | FamilyId::YnMinus | FamilyId::YnPlus => &["a"],
            FamilyId::CqHermite | FamilyId::CqInvHermite | FamilyId::ZnMinus | FamilyId::Zn | FamilyId::ZnPlus => &[],
        }
    }

    /// The corpus identity holding the representations.
    pub fn identity_id(self) -> &'static str {
        match self {
            FamilyId::CDqHahn => "cor4.1",
            FamilyId::CDqInvHahn => "cor4.11",
            FamilyId::ASC => "cor5.1",
            FamilyId::ASCqInv => "cor5.9",
            FamilyId::CBqHermite => "cbqH",
            FamilyId::CBqInvHermite => "cbqiH",
            FamilyId::CqHermite => "cqH",
            FamilyId::CqInvHermite => "cqiH",
            FamilyId::Xn => "Xn",
            FamilyId::YnMinus => "YnMinus",
            FamilyId::YnPlus => "YnPlus",
            FamilyId::ZnMinus => "ZnMinus",
            FamilyId::Zn => "Zn",
            FamilyId::ZnPlus => "ZnPlus",
        }
    }

    pub fn identity(self) -> &'static Identity {
        lookup(self.identity_id()).unwrap_or_else(|| panic!("corpus lacks `{}`", self.identity_id()))
    }

    pub fn is_limit_function(self) -> bool {
        !FamilyId::POLYNOMIALS.contains(&self)
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = PolyError;

    /// Accepts the variant name (case-insensitive) or the id of the backing
    /// corpus identity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FamilyId::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s) || f.identity_id() == s)
            .ok_or_else(|| PolyError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("{family} takes {expected} parameter(s), got {got}")]
    WrongArity { family: FamilyId, expected: usize, got: usize },
    #[error("{family} has {count} representation(s); index {index} is out of range")]
    NoSuchRepresentation { family: FamilyId, index: usize, count: usize },
    #[error("no representation of {family} admits the point: {}", .reasons.join("; "))]
    NoAdmissibleRepresentation { family: FamilyId, reasons: Vec<String> },
    #[error("representation {label} of {family} rejects the point: {reason}")]
    Inadmissible { family: FamilyId, label: String, reason: EvalError },
    #[error("{0} has no closed form")]
    NoClosedForm(FamilyId),
    #[error("no limit edge leaves {family} through parameter {param} {direction}")]
    NoSuchEdge { family: FamilyId, param: usize, direction: Direction },
}

/// A point at which to evaluate a family.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyPoint<S> {
    pub params: Vec<S>,
    /// `x = (z + 1/z)/2`.
    pub z: S,
    pub q: S,
    pub n: u32,
}

impl<S: Scalar> FamilyPoint<S> {
    pub fn new(params: Vec<S>, z: S, q: S, n: u32) -> Self {
        FamilyPoint { params, z, q, n }
    }

    pub fn assignment(&self, f: FamilyId) -> Result<Assignment<S>, PolyError> {
        let names = f.param_names();
        if names.len() != self.params.len() {
            return Err(PolyError::WrongArity { family: f, expected: names.len(), got: self.params.len() });
        }
        let mut a = Assignment::new(self.q.clone(), self.n);
        a.z = Some(self.z.clone());
        for (name, v) in names.iter().zip(&self.params) {
            a = a.with(name, v.clone());
        }
        Ok(a)
    }
}

impl FamilyPoint<FloatScalar> {
    /// Float point given `x` instead of `z`: `z = x + √(x² − 1)` on the
    /// principal branch. Either root gives the same values.
    pub fn from_x(params: Vec<FloatScalar>, x: FloatScalar, q: FloatScalar, n: u32) -> Self {
        let one = FloatScalar::one();
        let z = x.add(&x.mul(&x).sub(&one).sqrt());
        FamilyPoint { params, z, q, n }
    }
}

/// One displayed representation of a family.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    pub label: String,
    /// The role assignment that keeps parameters in natural order.
    pub expr: Expr,
    /// Every role assignment, as registered in the corpus.
    pub variants: Vec<Member>,
}

/// The family's representations in display order.
pub fn representations(f: FamilyId) -> Vec<Representation> {
    let ident = f.identity();
    ident
        .templates
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let variants: Vec<Member> = ident.members.iter().filter(|m| m.template == i).cloned().collect();
            let natural = variants.iter().find(|m| is_natural_order(&m.label)).or(variants.first());
            let expr = natural.map_or_else(|| t.expr.clone(), |m| m.expr.clone());
            Representation { label: t.label.clone(), expr, variants }
        })
        .collect()
}

/// `label@a1,a2,a3` with the suffix listing parameters in ascending order.
fn is_natural_order(label: &str) -> bool {
    match label.split_once('@') {
        None => true,
        Some((_, roles)) => {
            let v: Vec<&str> = roles.split(',').collect();
            v.windows(2).all(|w| w[0] <= w[1])
        }
    }
}

fn guard_failures<S: Scalar>(e: &Expr, a: &Assignment<S>) -> Result<Vec<Violation>, EvalError> {
    if e.is_float_only() && S::MODE == crate::scalar::Mode::Exact {
        return Err(EvalError::UnsupportedExact("infinite product".into()));
    }
    expr_guards(e, a)
}

fn eval_rep<S: Scalar>(e: &Expr, a: &Assignment<S>) -> Result<S, EvalError> {
    let v = guard_failures(e, a)?;
    if !v.is_empty() {
        return Err(EvalError::GuardViolated(v));
    }
    eval_expr(e, a)
}

/// Evaluates a family at `pt` through representation `rep` (0-based), or
/// through the first representation that admits the point.
pub fn eval_family<S: Scalar>(f: FamilyId, pt: &FamilyPoint<S>, rep: Option<usize>) -> Result<S, PolyError> {
    let a = pt.assignment(f)?;
    let reps = representations(f);
    match rep {
        Some(index) => {
            let r = reps.get(index).ok_or(PolyError::NoSuchRepresentation { family: f, index, count: reps.len() })?;
            eval_rep(&r.expr, &a).map_err(|reason| PolyError::Inadmissible { family: f, label: r.label.clone(), reason })
        }
        None => {
            let mut reasons = Vec::new();
            for r in &reps {
                match eval_rep(&r.expr, &a) {
                    Ok(v) => return Ok(v),
                    Err(e) => reasons.push(format!("{}: {e}", r.label)),
                }
            }
            Err(PolyError::NoAdmissibleRepresentation { family: f, reasons })
        }
    }
}

/// The closed form of a limit function.
pub fn closed_form<S: Scalar>(f: FamilyId, pt: &FamilyPoint<S>) -> Result<S, PolyError> {
    let expr = f.identity().closed_form.as_ref().ok_or(PolyError::NoClosedForm(f))?;
    let a = pt.assignment(f)?;
    eval_expr(expr, &a).map_err(|reason| PolyError::Inadmissible { family: f, label: "closed form".into(), reason })
}

// ---------------------------------------------------------------------------
// Limit edges
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToZero,
    ToInfinity,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::ToZero => "→0",
            Direction::ToInfinity => "→∞",
        })
    }
}

/// A limit edge of the scheme: as parameter `param` of `source` runs to
/// the limit, `rescale · source` tends to `target` evaluated at the
/// remaining parameters in order.
///
/// The q⁻¹ polynomial families enter the scheme at reciprocal parameters
/// (see [`FamilyId::scheme_reciprocal`]): their node value at `b` is the
/// family evaluated at `1/b`. Edge directions and rescales refer to the node
/// parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitEdge {
    pub source: FamilyId,
    pub target: FamilyId,
    pub direction: Direction,
    /// Written with the limiting parameter as the source's last name.
    pub rescale: Monomial,
}

impl FamilyId {
    /// True for the families whose scheme node is parametrized by the
    /// reciprocals of the family parameters.
    pub fn scheme_reciprocal(self) -> bool {
        matches!(self, FamilyId::CDqInvHahn | FamilyId::ASCqInv | FamilyId::CBqInvHermite | FamilyId::CqInvHermite)
    }

    /// The letter labelling this node's limit parameter in the scheme.
    pub fn limit_letter(self) -> char {
        match self.arity() {
            3 => 'e',
            2 => 'd',
            _ => 'c',
        }
    }
}

/// Evaluates the scheme node of `f` at node parameters `params`.
pub fn eval_node<S: Scalar>(f: FamilyId, pt: &FamilyPoint<S>) -> Result<S, PolyError> {
    if f.scheme_reciprocal() {
        let mut inv = pt.clone();
        for p in &mut inv.params {
            *p = p.inv().map_err(|e| PolyError::Inadmissible {
                family: f,
                label: "reciprocal parameters".into(),
                reason: e.into(),
            })?;
        }
        eval_family(f, &inv, None)
    } else {
        eval_family(f, pt, None)
    }
}

const EDGES: [(FamilyId, FamilyId, Direction, &str); 18] = {
    use Direction::{ToInfinity as Inf, ToZero as Zero};
    use FamilyId::*;
    [
        (CDqHahn, ASC, Zero, "1"),
        (CDqHahn, Xn, Inf, "a3^-n"),
        (CDqInvHahn, Xn, Zero, "q^(3binom) * (-a1*a2*a3)^n"),
        (CDqInvHahn, ASCqInv, Inf, "1"),
        (ASC, CBqHermite, Zero, "1"),
        (ASC, YnMinus, Inf, "a2^-n"),
        (Xn, YnMinus, Zero, "1"),
        (Xn, YnPlus, Inf, "a2^-n"),
        (ASCqInv, YnPlus, Zero, "q^(3binom) * (-a1*a2)^n"),
        (ASCqInv, CBqInvHermite, Inf, "1"),
        (CBqHermite, CqHermite, Zero, "1"),
        (CBqHermite, ZnMinus, Inf, "a^-n"),
        (YnMinus, ZnMinus, Zero, "1"),
        (YnMinus, Zn, Inf, "a^-n"),
        (YnPlus, Zn, Zero, "1"),
        (YnPlus, ZnPlus, Inf, "q^(-3binom) * (-1/a)^n"),
        (CBqInvHermite, ZnPlus, Zero, "a^n"),
        (CBqInvHermite, CqInvHermite, Inf, "1"),
    ]
};

/// All limit edges between implemented families.
pub fn limit_edges() -> Vec<LimitEdge> {
    EDGES
        .iter()
        .map(|&(source, target, direction, rescale)| LimitEdge {
            source,
            target,
            direction,
            rescale: parse_monomial(rescale).expect("edge rescale parses"),
        })
        .collect()
}

/// The edge leaving `f` when node parameter `param` (0-based) runs to the
/// limit. Every family is symmetric in its parameters, so the rescale is
/// returned with the limiting parameter renamed to `param`'s name.
pub fn limit_edge(f: FamilyId, param: usize, direction: Direction) -> Result<(FamilyId, Monomial), PolyError> {
    let names = f.param_names();
    let none = PolyError::NoSuchEdge { family: f, param, direction };
    if param >= names.len() {
        return Err(none);
    }
    let edge = limit_edges().into_iter().find(|e| e.source == f && e.direction == direction).ok_or(none)?;
    let last = names[names.len() - 1];
    let sub = [(last, names[param]), (names[param], last)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), Monomial::param(v)))
        .collect();
    let rescale = edge.rescale.substitute(&sub).expect("renaming keeps exponents affine");
    Ok((edge.target, rescale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactScalar;

    fn r(n: i64, d: i64) -> ExactScalar {
        ExactScalar::ratio(n, d)
    }

    fn pt(params: Vec<ExactScalar>, z: ExactScalar, q: ExactScalar, n: u32) -> FamilyPoint<ExactScalar> {
        FamilyPoint::new(params, z, q, n)
    }

    #[test]
    fn arities_follow_declaration_order() {
        let arities: Vec<usize> = FamilyId::ALL.iter().map(|f| f.arity()).collect();
        assert_eq!(arities, [3, 3, 2, 2, 1, 1, 0, 0, 2, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn representation_counts() {
        let counts: Vec<usize> = FamilyId::ALL.iter().map(|&f| representations(f).len()).collect();
        assert_eq!(counts, [8, 8, 7, 7, 6, 5, 2, 2, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn degree_one_values() {
        assert_eq!(eval_family(FamilyId::CqHermite, &pt(vec![], r(3, 1), r(1, 2), 1), None), Ok(r(10, 3)));
        assert_eq!(eval_family(FamilyId::ASC, &pt(vec![r(1, 3), r(1, 5)], r(2, 1), r(1, 2), 1), None), Ok(r(59, 30)));
        assert_eq!(eval_family(FamilyId::CBqHermite, &pt(vec![r(1, 3)], r(2, 1), r(1, 2), 1), None), Ok(r(13, 6)));
    }

    #[test]
    fn every_representation_is_one_at_degree_zero() {
        let params = [r(2, 3), r(-3, 5), r(5, 7)];
        for f in FamilyId::ALL {
            let p = pt(params[..f.arity()].to_vec(), r(4, 3), r(2, 5), 0);
            for (i, rep) in representations(f).iter().enumerate() {
                let a = p.assignment(f).unwrap();
                let v = if rep.expr.is_float_only() {
                    eval_expr(&rep.expr, &a.to_float()).unwrap().0.re
                } else {
                    eval_family(f, &p, Some(i)).unwrap().to_float().0.re
                };
                assert!((v - 1.0).abs() < 1e-12, "{f} {}: {v}", rep.label);
            }
        }
    }

    #[test]
    fn closed_forms() {
        assert_eq!(closed_form(FamilyId::Zn, &pt(vec![], r(2, 1), r(1, 2), 0)), Ok(r(1, 1)));
        assert_eq!(closed_form(FamilyId::Zn, &pt(vec![], r(2, 1), r(1, 2), 3)), Ok(r(0, 1)));
        assert_eq!(closed_form(FamilyId::ZnMinus, &pt(vec![], r(2, 1), r(1, 2), 2)), Ok(r(1, 2)));
        assert_eq!(closed_form(FamilyId::Xn, &pt(vec![r(1, 3), r(1, 5)], r(2, 1), r(1, 2), 1)), Ok(r(-14, 15)));
        assert_eq!(closed_form(FamilyId::CqHermite, &pt(vec![], r(2, 1), r(1, 2), 1)), Err(PolyError::NoClosedForm(FamilyId::CqHermite)));
    }

    #[test]
    fn limit_edge_examples() {
        assert_eq!(limit_edge(FamilyId::CDqHahn, 2, Direction::ToZero), Ok((FamilyId::ASC, Monomial::one())));
        let (t, m) = limit_edge(FamilyId::ASC, 1, Direction::ToInfinity).unwrap();
        assert_eq!((t, m), (FamilyId::YnMinus, parse_monomial("a2^-n").unwrap()));
        let (t, m) = limit_edge(FamilyId::ASC, 0, Direction::ToInfinity).unwrap();
        assert_eq!((t, m), (FamilyId::YnMinus, parse_monomial("a1^-n").unwrap()));
        assert_eq!(limit_edge(FamilyId::CBqHermite, 0, Direction::ToZero), Ok((FamilyId::CqHermite, Monomial::one())));
        assert!(matches!(limit_edge(FamilyId::CqHermite, 0, Direction::ToZero), Err(PolyError::NoSuchEdge { .. })));
        assert!(matches!(limit_edge(FamilyId::Zn, 0, Direction::ToInfinity), Err(PolyError::NoSuchEdge { .. })));
    }

    #[test]
    fn wrong_arity_and_bad_index() {
        let p = pt(vec![r(1, 3)], r(2, 1), r(1, 2), 1);
        assert!(matches!(eval_family(FamilyId::ASC, &p, None), Err(PolyError::WrongArity { expected: 2, got: 1, .. })));
        assert!(matches!(
            eval_family(FamilyId::CBqHermite, &p, Some(9)),
            Err(PolyError::NoSuchRepresentation { count: 6, .. })
        ));
    }

    #[test]
    fn names_parse() {
        for f in FamilyId::ALL {
            assert_eq!(f.name().parse::<FamilyId>(), Ok(f));
            assert_eq!(f.identity_id().parse::<FamilyId>(), Ok(f));
        }
        assert_eq!("cqhermite".parse::<FamilyId>(), Ok(FamilyId::CqHermite));
        assert!("Jacobi".parse::<FamilyId>().is_err());
    }

    #[test]
    fn float_point_from_x_matches_z() {
        let x = FloatScalar::new(5.0 / 4.0, 0.0);
        let q = FloatScalar::new(0.5, 0.0);
        let p = FamilyPoint::from_x(vec![], x, q, 3);
        let viaz = eval_family(FamilyId::CqHermite, &FamilyPoint::new(vec![], FloatScalar::new(2.0, 0.0), q, 3), None).unwrap();
        let viax = eval_family(FamilyId::CqHermite, &p, None).unwrap();
        assert!(crate::scalar::approx_eq(&viax, &viaz, 1e-12));
        // inside [-1, 1] z is on the unit circle and the value stays real
        let p = FamilyPoint::from_x(vec![], FloatScalar::new(0.3, 0.0), q, 4);
        let v = eval_family(FamilyId::CqHermite, &p, None).unwrap();
        assert!(v.0.im.abs() < 1e-12);
    }
}
