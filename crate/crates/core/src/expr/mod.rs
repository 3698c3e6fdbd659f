//! Symbolic templates: a monomial prefactor, a product of q-Pochhammer
//! factors and at most one series, all with exponents affine in `n` and
//! `binom(n,2)`. Templates are parsed from a small text language (see
//! `docs/dsl.md`) and evaluated at concrete assignments.

mod parse;
mod render;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{EvalError, ScalarError, Violation};
use crate::qpoch::{qpoch, qpoch_inf, PochLength};
use crate::scalar::{ExactScalar, FloatScalar, Mode, Scalar};
use crate::series::{eval_phi_nonterminating, SeriesKind, SeriesSpec, Termination};

pub use parse::{parse_expr, parse_item_list, parse_monomial};
pub use render::render_expr;

/// Relative tolerance used for infinite products and nonterminating series.
pub const FLOAT_SERIES_TOL: f64 = 1e-15;

/// `c0 + c1·n + c2·binom(n,2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Affine {
    pub c0: i64,
    pub c1: i64,
    pub c2: i64,
}

impl Affine {
    pub const ZERO: Affine = Affine { c0: 0, c1: 0, c2: 0 };
    pub const N: Affine = Affine { c0: 0, c1: 1, c2: 0 };
    pub const BINOM: Affine = Affine { c0: 0, c1: 0, c2: 1 };

    pub const fn new(c0: i64, c1: i64, c2: i64) -> Self {
        Affine { c0, c1, c2 }
    }

    pub const fn constant(c0: i64) -> Self {
        Affine { c0, c1: 0, c2: 0 }
    }

    pub fn is_zero(&self) -> bool {
        *self == Affine::ZERO
    }

    pub fn is_constant(&self) -> bool {
        self.c1 == 0 && self.c2 == 0
    }

    pub fn at(&self, n: u32) -> i64 {
        let n = i64::from(n);
        self.c0 + self.c1 * n + self.c2 * (n * (n - 1) / 2)
    }

    pub fn add(&self, o: &Affine) -> Affine {
        Affine::new(self.c0 + o.c0, self.c1 + o.c1, self.c2 + o.c2)
    }

    pub fn neg(&self) -> Affine {
        Affine::new(-self.c0, -self.c1, -self.c2)
    }

    pub fn scale(&self, k: i64) -> Affine {
        Affine::new(self.c0 * k, self.c1 * k, self.c2 * k)
    }

    /// Product of two affine forms, when it stays affine.
    pub fn mul(&self, o: &Affine) -> Option<Affine> {
        if self.is_constant() {
            Some(o.scale(self.c0))
        } else if o.is_constant() {
            Some(self.scale(o.c0))
        } else {
            None
        }
    }

    fn mod2(&self) -> Affine {
        Affine::new(self.c0.rem_euclid(2), self.c1.rem_euclid(2), self.c2.rem_euclid(2))
    }
}

// ---------------------------------------------------------------------------
// Monomials
// ---------------------------------------------------------------------------

/// `coeff · (−1)^{sign} · q^{q} · ∏ param^{exp}`, with `coeff > 0` and
/// the sign exponent reduced mod 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub coeff: BigRational,
    pub sign: Affine,
    pub q: Affine,
    pub params: BTreeMap<String, Affine>,
}

impl Default for Monomial {
    fn default() -> Self {
        Monomial::one()
    }
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { coeff: BigRational::one(), sign: Affine::ZERO, q: Affine::ZERO, params: BTreeMap::new() }
    }

    /// A nonzero rational constant.
    pub fn constant(c: BigRational) -> Self {
        assert!(!c.is_zero(), "monomial coefficients are nonzero");
        let mut m = Monomial::one();
        if c.is_negative() {
            m.sign = Affine::constant(1);
        }
        m.coeff = c.abs();
        m
    }

    pub fn integer(c: i64) -> Self {
        Monomial::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn param(name: &str) -> Self {
        Monomial::one().with_param(name, Affine::constant(1))
    }

    pub fn q_pow(e: Affine) -> Self {
        Monomial { q: e, ..Monomial::one() }
    }

    pub fn with_param(mut self, name: &str, e: Affine) -> Self {
        let slot = self.params.entry(name.to_string()).or_default();
        *slot = slot.add(&e);
        if slot.is_zero() {
            self.params.remove(name);
        }
        self
    }

    pub fn is_one(&self) -> bool {
        *self == Monomial::one()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut out = Monomial {
            coeff: &self.coeff * &o.coeff,
            sign: self.sign.add(&o.sign).mod2(),
            q: self.q.add(&o.q),
            params: self.params.clone(),
        };
        for (k, e) in &o.params {
            out = out.with_param(k, *e);
        }
        out
    }

    pub fn inv(&self) -> Monomial {
        Monomial {
            coeff: self.coeff.recip(),
            sign: self.sign,
            q: self.q.neg(),
            params: self.params.iter().map(|(k, e)| (k.clone(), e.neg())).collect(),
        }
    }

    pub fn div(&self, o: &Monomial) -> Monomial {
        self.mul(&o.inv())
    }

    pub fn neg(&self) -> Monomial {
        Monomial { sign: self.sign.add(&Affine::constant(1)).mod2(), ..self.clone() }
    }

    /// `self^e`; fails when an exponent would leave the affine class or a
    /// non-unit coefficient is raised to an `n`-dependent power.
    pub fn pow(&self, e: &Affine) -> Result<Monomial, String> {
        if let Some(k) = e.is_constant().then_some(e.c0) {
            let coeff = pow_ratio(&self.coeff, k);
            return Ok(Monomial {
                coeff,
                sign: self.sign.scale(k).mod2(),
                q: self.q.scale(k),
                params: self.params.iter().map(|(n, x)| (n.clone(), x.scale(k))).collect(),
            });
        }
        if !self.coeff.is_one() {
            return Err(format!("numeric factor {} cannot carry an n-dependent exponent", self.coeff));
        }
        let lift = |x: &Affine| x.mul(e).ok_or_else(|| "exponent is not affine in n and binom(n,2)".to_string());
        let mut params = BTreeMap::new();
        for (n, x) in &self.params {
            params.insert(n.clone(), lift(x)?);
        }
        Ok(Monomial { coeff: BigRational::one(), sign: lift(&self.sign)?.mod2(), q: lift(&self.q)?, params })
    }

    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    /// Replaces each parameter by a monomial.
    pub fn substitute(&self, map: &BTreeMap<String, Monomial>) -> Result<Monomial, String> {
        let mut out = Monomial { params: BTreeMap::new(), ..self.clone() };
        for (name, e) in &self.params {
            match map.get(name) {
                Some(m) => out = out.mul(&m.pow(e)?),
                None => out = out.with_param(name, *e),
            }
        }
        Ok(out)
    }

    pub fn eval<S: Scalar>(&self, a: &Assignment<S>) -> Result<S, EvalError> {
        let n = a.n;
        let mut v = S::from_exact(&ExactScalar::real(self.coeff.clone()));
        if self.sign.at(n).rem_euclid(2) == 1 {
            v = v.neg();
        }
        let qe = self.q.at(n);
        if qe != 0 {
            v = v.mul(&a.q.pow_int(qe)?);
        }
        for (name, e) in &self.params {
            let x = a.get(name)?;
            let k = e.at(n);
            if k != 0 {
                v = v.mul(&x.pow_int(k).map_err(|_| EvalError::PrefactorPole(format!("{name} = 0")))?);
            }
        }
        Ok(v)
    }
}

fn pow_ratio(r: &BigRational, k: i64) -> BigRational {
    let k32 = i32::try_from(k).expect("constant exponent fits in i32");
    num_traits::Pow::pow(r, k32)
}

// ---------------------------------------------------------------------------
// Pochhammer factors, series templates and expressions
// ---------------------------------------------------------------------------

/// The base of a Pochhammer symbol or series, as a power of `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QBase(pub i64);

impl QBase {
    pub const Q: QBase = QBase(1);
    pub const Q_INV: QBase = QBase(-1);

    pub fn eval<S: Scalar>(&self, q: &S) -> Result<S, EvalError> {
        Ok(q.pow_int(self.0)?)
    }
}

/// `(args; q^k)_len`, in the numerator or (when `inverse`) the denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PochFactor {
    pub inverse: bool,
    pub base: QBase,
    pub length: PochLength,
    pub args: Vec<Monomial>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateKind {
    Phi,
    W { head: Monomial },
}

/// A series whose entries are monomials. A terminating template carries the
/// leading `base^{-n}` entry implicitly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeriesTemplate {
    pub kind: TemplateKind,
    pub zeros: i64,
    pub terminating: bool,
    pub numerator: Vec<Monomial>,
    pub denominator: Vec<Monomial>,
    pub base: QBase,
    pub argument: Monomial,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr {
    pub prefactor: Monomial,
    pub pochs: Vec<PochFactor>,
    pub series: Option<SeriesTemplate>,
}

/// Concrete values for a template's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment<S> {
    pub values: BTreeMap<String, S>,
    pub q: S,
    pub z: Option<S>,
    pub n: u32,
}

impl<S: Scalar> Assignment<S> {
    pub fn new(q: S, n: u32) -> Self {
        Assignment { values: BTreeMap::new(), q, z: None, n }
    }

    pub fn with(mut self, name: &str, v: S) -> Self {
        if name == "z" {
            self.z = Some(v);
        } else {
            self.values.insert(name.to_string(), v);
        }
        self
    }

    pub fn get(&self, name: &str) -> Result<&S, EvalError> {
        if name == "z" {
            return self.z.as_ref().ok_or_else(|| EvalError::UnboundParam("z".into()));
        }
        self.values.get(name).ok_or_else(|| EvalError::UnboundParam(name.to_string()))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Assignment<T> {
        Assignment {
            values: self.values.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
            q: f(&self.q),
            z: self.z.as_ref().map(&f),
            n: self.n,
        }
    }

    pub fn to_float(&self) -> Assignment<FloatScalar> {
        self.map(Scalar::to_float)
    }
}

impl SeriesTemplate {
    fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        let head = match &self.kind {
            TemplateKind::W { head } => Some(head),
            TemplateKind::Phi => None,
        };
        head.into_iter().chain(&self.numerator).chain(&self.denominator).chain(std::iter::once(&self.argument))
    }

    /// The series with every entry evaluated.
    pub fn instantiate<S: Scalar>(&self, a: &Assignment<S>) -> Result<SeriesSpec<S>, EvalError> {
        let ev = |ms: &[Monomial]| ms.iter().map(|m| m.eval(a)).collect::<Result<Vec<_>, _>>();
        let base = self.base.eval(&a.q)?;
        let argument = self.argument.eval(a)?;
        let termination = if self.terminating { Termination::Terminating(a.n) } else { Termination::Nonterminating };
        let kind = match &self.kind {
            TemplateKind::Phi => SeriesKind::Phi,
            TemplateKind::W { head } => SeriesKind::W { head: head.eval(a)? },
        };
        Ok(SeriesSpec {
            kind,
            numerator: ev(&self.numerator)?,
            denominator: ev(&self.denominator)?,
            zeros: self.zeros,
            base,
            argument,
            termination,
        })
    }

    fn map_monomials(&self, f: &impl Fn(&Monomial) -> Result<Monomial, String>) -> Result<SeriesTemplate, String> {
        let all = |ms: &[Monomial]| ms.iter().map(f).collect::<Result<Vec<_>, _>>();
        Ok(SeriesTemplate {
            kind: match &self.kind {
                TemplateKind::Phi => TemplateKind::Phi,
                TemplateKind::W { head } => TemplateKind::W { head: f(head)? },
            },
            numerator: all(&self.numerator)?,
            denominator: all(&self.denominator)?,
            argument: f(&self.argument)?,
            ..self.clone()
        })
    }
}

impl Expr {
    pub fn one() -> Self {
        Expr { prefactor: Monomial::one(), pochs: Vec::new(), series: None }
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        std::iter::once(&self.prefactor)
            .chain(self.pochs.iter().flat_map(|p| p.args.iter()))
            .chain(self.series.iter().flat_map(|s| s.monomials()))
    }

    /// Parameter names other than `q`, `n` and `z`.
    pub fn free_params(&self) -> BTreeSet<String> {
        self.monomials().flat_map(|m| m.param_names()).filter(|n| *n != "z").map(str::to_string).collect()
    }

    pub fn uses_z(&self) -> bool {
        self.monomials().any(|m| m.params.contains_key("z"))
    }

    pub fn is_float_only(&self) -> bool {
        self.pochs.iter().any(|p| p.length == PochLength::Infinite)
            || self.series.as_ref().is_some_and(|s| !s.terminating)
    }

    pub fn map_monomials(&self, f: impl Fn(&Monomial) -> Result<Monomial, String>) -> Result<Expr, String> {
        let pochs = self
            .pochs
            .iter()
            .map(|p| Ok(PochFactor { args: p.args.iter().map(&f).collect::<Result<_, String>>()?, ..p.clone() }))
            .collect::<Result<Vec<_>, String>>()?;
        Ok(Expr {
            prefactor: f(&self.prefactor)?,
            pochs,
            series: self.series.as_ref().map(|s| s.map_monomials(&f)).transpose()?,
        })
    }

    pub fn substitute(&self, map: &BTreeMap<String, Monomial>) -> Result<Expr, String> {
        self.map_monomials(|m| m.substitute(map))
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Expr {
        let sub: BTreeMap<String, Monomial> = map.iter().map(|(k, v)| (k.clone(), Monomial::param(v))).collect();
        self.substitute(&sub).expect("renaming keeps exponents affine")
    }

    /// Sorted argument lists and factor order, for structural comparison.
    pub fn canonical(&self) -> Expr {
        let mut out = self.clone();
        for p in &mut out.pochs {
            p.args.sort();
        }
        // merge factors that differ only in their argument lists
        out.pochs.sort();
        let mut merged: Vec<PochFactor> = Vec::new();
        for p in out.pochs.drain(..) {
            match merged.last_mut() {
                Some(last) if last.inverse == p.inverse && last.base == p.base && last.length == p.length => {
                    last.args.extend(p.args);
                    last.args.sort();
                }
                _ => merged.push(p),
            }
        }
        out.pochs = merged;
        if let Some(s) = &mut out.series {
            s.numerator.sort();
            s.denominator.sort();
        }
        out
    }

    pub fn mul(&self, o: &Expr) -> Result<Expr, String> {
        let series = match (&self.series, &o.series) {
            (Some(_), Some(_)) => return Err("at most one series per expression".into()),
            (s, None) | (None, s) => s.clone(),
        };
        let mut pochs = self.pochs.clone();
        pochs.extend(o.pochs.iter().cloned());
        Ok(Expr { prefactor: self.prefactor.mul(&o.prefactor), pochs, series })
    }

    pub fn inv(&self) -> Result<Expr, String> {
        if self.series.is_some() {
            return Err("a series cannot appear in a denominator".into());
        }
        let pochs = self.pochs.iter().map(|p| PochFactor { inverse: !p.inverse, ..p.clone() }).collect();
        Ok(Expr { prefactor: self.prefactor.inv(), pochs, series: None })
    }

    pub fn as_monomial(&self) -> Option<&Monomial> {
        (self.pochs.is_empty() && self.series.is_none()).then_some(&self.prefactor)
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// `prefactor · ∏ poch^{±1} · series`, exact in exact mode.
pub fn eval_expr<S: Scalar>(e: &Expr, a: &Assignment<S>) -> Result<S, EvalError> {
    if e.is_float_only() {
        if S::MODE == Mode::Exact {
            return Err(EvalError::UnsupportedExact("an infinite product or nonterminating series".into()));
        }
        let v = eval_float_parts(e, &a.to_float())?;
        return S::from_float(&v).ok_or_else(|| EvalError::UnsupportedExact("float value".into()));
    }
    let mut value = e.prefactor.eval(a)?;
    for p in &e.pochs {
        let f = eval_poch(p, a)?;
        if p.inverse {
            if f.is_zero() {
                return Err(EvalError::PrefactorPole(render::poch_text(p)));
            }
            value = value.div(&f)?;
        } else {
            value = value.mul(&f);
        }
    }
    if let Some(s) = &e.series {
        let spec = s.instantiate(a)?;
        value = value.mul(&spec.eval()?);
    }
    Ok(value)
}

/// [`eval_expr`] followed by a height check on the result.
pub fn eval_expr_capped<S: Scalar>(e: &Expr, a: &Assignment<S>, cap_bits: Option<u64>) -> Result<S, EvalError> {
    let v = eval_expr(e, a)?;
    if let Some(cap) = cap_bits {
        let bits = v.height_bits();
        if bits > cap {
            return Err(EvalError::HeightOverflow { bits, cap });
        }
    }
    Ok(v)
}

fn eval_poch<S: Scalar>(p: &PochFactor, a: &Assignment<S>) -> Result<S, EvalError> {
    let base = p.base.eval(&a.q)?;
    let len = p.length.at(a.n)?.ok_or_else(|| EvalError::UnsupportedExact("infinite product".into()))?;
    let mut acc = S::one();
    for m in &p.args {
        acc = acc.mul(&qpoch(&m.eval(a)?, &base, len));
    }
    Ok(acc)
}

fn eval_float_parts(e: &Expr, a: &Assignment<FloatScalar>) -> Result<FloatScalar, EvalError> {
    let mut value = e.prefactor.eval(a)?;
    for p in &e.pochs {
        let f = match p.length {
            PochLength::Infinite => {
                let base = p.base.eval(&a.q)?;
                let mut acc = FloatScalar::one();
                for m in &p.args {
                    acc = acc.mul(&qpoch_inf(&m.eval(a)?, &base, FLOAT_SERIES_TOL)?);
                }
                acc
            }
            _ => eval_poch(p, a)?,
        };
        if p.inverse {
            if f.abs() == 0.0 {
                return Err(EvalError::PoleAtOmegaPoint);
            }
            value = value.div(&f)?;
        } else {
            value = value.mul(&f);
        }
    }
    if let Some(s) = &e.series {
        let spec = s.instantiate(a)?;
        let v = if s.terminating { spec.eval()? } else { eval_phi_nonterminating(&spec, FLOAT_SERIES_TOL)? };
        value = value.mul(&v);
    }
    Ok(value)
}

/// Denominator factors and series guards of `e` at `a`, without evaluating
/// the series.
pub fn expr_guards<S: Scalar>(e: &Expr, a: &Assignment<S>) -> Result<Vec<Violation>, EvalError> {
    let mut out = Vec::new();
    for p in e.pochs.iter().filter(|p| p.inverse && p.length != PochLength::Infinite) {
        match eval_poch(p, a) {
            Ok(v) if v.is_zero() => out.push(Violation::Pole(render::poch_text(p))),
            Ok(_) => {}
            Err(EvalError::Scalar(ScalarError::DivisionByZero)) | Err(EvalError::PrefactorPole(_)) => {
                out.push(Violation::Pole(render::poch_text(p)))
            }
            Err(err) => return Err(err),
        }
    }
    if let Some(s) = &e.series {
        match s.instantiate(a) {
            Ok(spec) => out.extend(spec.guards()),
            Err(EvalError::Scalar(ScalarError::DivisionByZero)) | Err(EvalError::PrefactorPole(_)) => {
                out.push(Violation::Pole("series entry".into()))
            }
            Err(err) => return Err(err),
        }
    }
    Ok(out)
}
