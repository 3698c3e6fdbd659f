//! Terminating basic hypergeometric series `φ` and very-well-poised series `W`,
//! with zero parameters counted through a signed `p`.
//!
//! A terminating series stores `q^{-n}` implicitly through its termination
//! index; `numerator` holds only the remaining entries. For `W` the
//! `numerator` is the tail `a_5, …` after `q^{-n}`, and the denominator is
//! derived from the head.

use std::fmt;

use num_complex::Complex64;

use crate::error::{EvalError, Violation};
use crate::qpoch::omega_index;
use crate::scalar::{FloatScalar, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    Terminating(u32),
    Nonterminating,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SeriesKind<S> {
    Phi,
    W { head: S },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSpec<S> {
    pub kind: SeriesKind<S>,
    pub numerator: Vec<S>,
    pub denominator: Vec<S>,
    /// Positive: denominator zeros. Negative: numerator zeros.
    pub zeros: i64,
    pub base: S,
    pub argument: S,
    pub termination: Termination,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub balanced: Option<i64>,
    pub well_poised: bool,
    pub very_well_poised: bool,
}

impl<S: Scalar> SeriesSpec<S> {
    /// Terminating `φ^p` with `q^{-n}` in front of `numerator`.
    pub fn phi(n: u32, numerator: Vec<S>, denominator: Vec<S>, zeros: i64, base: S, argument: S) -> Self {
        SeriesSpec {
            kind: SeriesKind::Phi,
            numerator,
            denominator,
            zeros,
            base,
            argument,
            termination: Termination::Terminating(n),
        }
    }

    /// Nonterminating `φ^p`; every numerator entry is explicit.
    pub fn phi_nonterminating(numerator: Vec<S>, denominator: Vec<S>, zeros: i64, base: S, argument: S) -> Self {
        SeriesSpec {
            kind: SeriesKind::Phi,
            numerator,
            denominator,
            zeros,
            base,
            argument,
            termination: Termination::Nonterminating,
        }
    }

    /// Terminating `W^p(head; q^{-n}, tail; q, z)`.
    pub fn w(n: u32, head: S, tail: Vec<S>, zeros: i64, base: S, argument: S) -> Self {
        SeriesSpec {
            kind: SeriesKind::W { head },
            numerator: tail,
            denominator: Vec::new(),
            zeros,
            base,
            argument,
            termination: Termination::Terminating(n),
        }
    }

    pub fn n(&self) -> Option<u32> {
        match self.termination {
            Termination::Terminating(n) => Some(n),
            Termination::Nonterminating => None,
        }
    }

    pub fn is_w(&self) -> bool {
        matches!(self.kind, SeriesKind::W { .. })
    }

    /// Number of numerator entries of the `φ` form, counting `q^{-n}` but not zeros.
    pub fn upper_count(&self) -> usize {
        let implicit = usize::from(self.n().is_some());
        match self.kind {
            SeriesKind::Phi => self.numerator.len() + implicit,
            SeriesKind::W { .. } => self.numerator.len() + 4,
        }
    }

    /// Number of denominator entries of the `φ` form, not counting zeros.
    pub fn lower_count(&self) -> usize {
        match self.kind {
            SeriesKind::Phi => self.denominator.len(),
            SeriesKind::W { .. } => self.numerator.len() + 3,
        }
    }

    /// The power of `(−1)^k q^{binom(k,2)}` carried by each term.
    pub fn sign_exponent(&self) -> i64 {
        match self.kind {
            SeriesKind::Phi => 1 + self.lower_count() as i64 - self.upper_count() as i64 + self.zeros,
            SeriesKind::W { .. } => self.zeros,
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> SeriesSpec<T> {
        SeriesSpec {
            kind: match &self.kind {
                SeriesKind::Phi => SeriesKind::Phi,
                SeriesKind::W { head } => SeriesKind::W { head: f(head) },
            },
            numerator: self.numerator.iter().map(&f).collect(),
            denominator: self.denominator.iter().map(&f).collect(),
            zeros: self.zeros,
            base: f(&self.base),
            argument: f(&self.argument),
            termination: self.termination,
        }
    }

    pub fn to_float(&self) -> SeriesSpec<FloatScalar> {
        self.map(Scalar::to_float)
    }

    /// Every violated admissibility condition, in a fixed order.
    pub fn guards(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let q = &self.base;
        if q.is_zero() {
            out.push(Violation::BaseZero);
            return out;
        }
        if q.modulus_cmp_one() == std::cmp::Ordering::Equal {
            out.push(Violation::BaseOnUnitCircle);
        }
        let n = self.n();
        let check = |index: usize, b: &S, out: &mut Vec<Violation>| {
            if b.is_zero() {
                out.push(Violation::DenominatorZero { index });
            } else if let Some(n) = n {
                if let Some(k) = omega_index(b, q, n) {
                    out.push(Violation::DenominatorInOmega { index, k });
                }
            }
        };
        match &self.kind {
            SeriesKind::Phi => {
                for (i, b) in self.denominator.iter().enumerate() {
                    check(i, b, &mut out);
                }
            }
            SeriesKind::W { head } => {
                if head.is_zero() {
                    out.push(Violation::HeadZero);
                    return out;
                }
                let n = n.unwrap_or(0);
                let q2 = q.mul(q);
                if let Some(k) = omega_index(head, &q2, n) {
                    out.push(Violation::HeadDegenerate { k });
                }
                let qa = q.mul(head);
                let Ok(qn1a) = q.pow_int(i64::from(n)).map(|qn| qn.mul(&qa)) else {
                    return out;
                };
                check(0, &qn1a, &mut out);
                for (i, t) in self.numerator.iter().enumerate() {
                    if t.is_zero() {
                        out.push(Violation::Pole(format!("qa/a_{}", i + 5)));
                    } else if let Ok(b) = qa.div(t) {
                        check(i + 1, &b, &mut out);
                    }
                }
            }
        }
        out
    }

    fn require_admissible(&self) -> Result<(), EvalError> {
        let v = self.guards();
        if v.is_empty() {
            Ok(())
        } else {
            Err(EvalError::GuardViolated(v))
        }
    }

    /// Evaluates a terminating series of either kind.
    pub fn eval(&self) -> Result<S, EvalError> {
        match self.kind {
            SeriesKind::Phi => eval_phi(self),
            SeriesKind::W { .. } => eval_w(self),
        }
    }

    /// `φ` form of a `W` series with head `s²`, given `s`.
    pub fn expanded_with_root(&self, s: &S) -> Result<SeriesSpec<S>, EvalError> {
        let SeriesKind::W { .. } = &self.kind else {
            return Ok(self.clone());
        };
        let n = self.n().ok_or(EvalError::NotTerminating)?;
        let q = &self.base;
        let a = s.mul(s);
        let qs = q.mul(s);
        let mut num = vec![qs.clone(), qs.neg(), a.clone()];
        num.extend(self.numerator.iter().cloned());
        let qa = q.mul(&a);
        let mut den = vec![s.clone(), s.neg(), q.pow_int(i64::from(n))?.mul(&qa)];
        for t in &self.numerator {
            den.push(qa.div(t)?);
        }
        Ok(SeriesSpec::phi(n, num, den, self.zeros, q.clone(), self.argument.clone()))
    }

    /// Balance, well-poisedness and very-well-poisedness of the `φ` form.
    pub fn classify(&self) -> Classification {
        match &self.kind {
            SeriesKind::W { head } => {
                let Some(n) = self.n() else {
                    return Classification { balanced: None, well_poised: true, very_well_poised: true };
                };
                let q = &self.base;
                let mut num = vec![q.pow_int(-i64::from(n)).unwrap_or_else(|_| S::zero()), q.mul(q).mul(head).neg(), head.clone()];
                num.extend(self.numerator.iter().cloned());
                let qa = q.mul(head);
                let mut den = vec![head.neg(), q.pow_int(i64::from(n)).map(|x| x.mul(&qa)).unwrap_or_else(|_| S::zero())];
                den.extend(self.numerator.iter().map(|t| qa.div(t).unwrap_or_else(|_| S::zero())));
                let balanced = if self.zeros == 0 { balance(&num, &den, q) } else { None };
                Classification { balanced, well_poised: self.zeros == 0, very_well_poised: self.zeros == 0 }
            }
            SeriesKind::Phi => {
                if self.zeros != 0 {
                    return Classification { balanced: None, well_poised: false, very_well_poised: false };
                }
                let q = &self.base;
                let mut num = Vec::new();
                if let Some(n) = self.n() {
                    num.push(q.pow_int(-i64::from(n)).unwrap_or_else(|_| S::zero()));
                }
                num.extend(self.numerator.iter().cloned());
                let balanced = balance(&num, &self.denominator, q);
                let (wp, vwp) = poisedness(&num, &self.denominator, q);
                Classification { balanced, well_poised: wp, very_well_poised: vwp }
            }
        }
    }
}

fn product<S: Scalar>(xs: &[S]) -> S {
    xs.iter().fold(S::one(), |acc, x| acc.mul(x))
}

const MAX_BALANCE: i64 = 256;

/// The `ℓ` with `q^ℓ ∏num = ∏den`, searched over `|ℓ| ≤ 256`.
fn balance<S: Scalar>(num: &[S], den: &[S], q: &S) -> Option<i64> {
    let pn = product(num);
    let pd = product(den);
    if pn.is_zero() || pd.is_zero() {
        return None;
    }
    let target = pd.div(&pn).ok()?;
    let qi = q.inv().ok()?;
    let (mut up, mut down) = (S::one(), S::one());
    for l in 0..=MAX_BALANCE {
        if close(&up, &target) {
            return Some(l);
        }
        if l > 0 && close(&down, &target) {
            return Some(-l);
        }
        up = up.mul(q);
        down = down.mul(&qi);
    }
    None
}

fn close<S: Scalar>(a: &S, b: &S) -> bool {
    match S::MODE {
        crate::scalar::Mode::Exact => a == b,
        crate::scalar::Mode::Float => crate::scalar::approx_eq(&a.to_float(), &b.to_float(), 1e-12),
    }
}

/// Whether some numerator `a_1` and a matching of the rest to the
/// denominators gives `q a_1 = b_i a_{i+1}`, and whether that pairing
/// contains `±q√a_1`.
fn poisedness<S: Scalar>(num: &[S], den: &[S], q: &S) -> (bool, bool) {
    if num.len() != den.len() + 1 {
        return (false, false);
    }
    let mut wp = false;
    for (h, head) in num.iter().enumerate() {
        let qa = q.mul(head);
        let rest: Vec<&S> = num.iter().enumerate().filter(|&(i, _)| i != h).map(|(_, x)| x).collect();
        let mut used = vec![false; den.len()];
        let matched = rest.iter().all(|x| {
            let slot = den.iter().enumerate().position(|(j, b)| !used[j] && close(&b.mul(x), &qa));
            match slot {
                Some(j) => {
                    used[j] = true;
                    true
                }
                None => false,
            }
        });
        if !matched {
            continue;
        }
        wp = true;
        let q2a = q.mul(&qa);
        for i in 0..rest.len() {
            for j in i + 1..rest.len() {
                if rest[i].add(rest[j]).is_zero() && close(&rest[i].mul(rest[j]).neg(), &q2a) {
                    return (true, true);
                }
            }
        }
    }
    (wp, false)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Terminating `φ^p` by incremental term ratios.
pub fn eval_phi<S: Scalar>(spec: &SeriesSpec<S>) -> Result<S, EvalError> {
    if spec.is_w() {
        return eval_w(spec);
    }
    let n = spec.n().ok_or(EvalError::NotTerminating)?;
    spec.require_admissible()?;
    let q = &spec.base;
    let e = spec.sign_exponent();
    let one = S::one();
    let q_e = q.pow_int(e)?;
    let mut sign_pow = S::from_i64(if e.rem_euclid(2) == 0 { 1 } else { -1 });
    let mut qk = S::one();
    let qmn = q.pow_int(-i64::from(n))?;
    let mut num: Vec<S> = std::iter::once(qmn).chain(spec.numerator.iter().cloned()).collect();
    let mut den: Vec<S> = spec.denominator.clone();
    let mut term = S::one();
    let mut sum = S::one();
    for _ in 0..n {
        // term_{k+1}/term_k = ∏(1−a q^k) / ((1−q^{k+1}) ∏(1−b q^k)) · (−q^k)^e · z
        let mut top = num.iter().fold(S::one(), |acc, a| acc.mul(&one.sub(a)));
        let qk1 = qk.mul(q);
        let bottom = den.iter().fold(one.sub(&qk1), |acc, b| acc.mul(&one.sub(b)));
        top = top.mul(&sign_pow).mul(&spec.argument);
        term = term.mul(&top).div(&bottom)?;
        sum = sum.add(&term);
        for a in &mut num {
            *a = a.mul(q);
        }
        for b in &mut den {
            *b = b.mul(q);
        }
        qk = qk1;
        sign_pow = sign_pow.mul(&q_e);
    }
    Ok(sum)
}

/// Terminating `W^p`, with the `±q√a, ±√a` pairs replaced by the factor
/// `(1 − a q^{2k}) / (1 − a)`.
pub fn eval_w<S: Scalar>(spec: &SeriesSpec<S>) -> Result<S, EvalError> {
    let SeriesKind::W { head } = &spec.kind else {
        return eval_phi(spec);
    };
    let n = spec.n().ok_or(EvalError::NotTerminating)?;
    spec.require_admissible()?;
    let q = &spec.base;
    let one = S::one();
    let e = spec.zeros;
    let q_e = q.pow_int(e)?;
    let mut sign_pow = S::from_i64(if e.rem_euclid(2) == 0 { 1 } else { -1 });
    let qa = q.mul(head);
    let mut num: Vec<S> = vec![head.clone(), q.pow_int(-i64::from(n))?];
    num.extend(spec.numerator.iter().cloned());
    let mut den: Vec<S> = vec![q.pow_int(i64::from(n))?.mul(&qa)];
    for t in &spec.numerator {
        den.push(qa.div(t)?);
    }
    let q2 = q.mul(q);
    let one_minus_a = one.sub(head);
    let mut aq2k = head.clone();
    let mut qk = S::one();
    // `base` tracks the term without the very-well-poised factor.
    let mut base_term = S::one();
    let mut sum = S::one();
    for _ in 0..n {
        let top = num.iter().fold(S::one(), |acc, a| acc.mul(&one.sub(a))).mul(&sign_pow).mul(&spec.argument);
        let qk1 = qk.mul(q);
        let bottom = den.iter().fold(one.sub(&qk1), |acc, b| acc.mul(&one.sub(b)));
        base_term = base_term.mul(&top).div(&bottom)?;
        aq2k = aq2k.mul(&q2);
        let vwp = one.sub(&aq2k).div(&one_minus_a)?;
        sum = sum.add(&base_term.mul(&vwp));
        for a in &mut num {
            *a = a.mul(q);
        }
        for b in &mut den {
            *b = b.mul(q);
        }
        qk = qk1;
        sign_pow = sign_pow.mul(&q_e);
    }
    Ok(sum)
}

const MAX_TERMS: usize = 200_000;

/// Partial sums of a `φ^p` series in floating point until the tail estimate
/// falls below `rel_tol` relative to the sum. Terminating specs are summed
/// to their last term.
pub fn eval_phi_nonterminating(spec: &SeriesSpec<FloatScalar>, rel_tol: f64) -> Result<FloatScalar, EvalError> {
    if let SeriesKind::W { .. } = spec.kind {
        return eval_w(spec);
    }
    if let Some(_n) = spec.n() {
        return eval_phi(spec);
    }
    let q = spec.base.0;
    if q.norm() >= 1.0 {
        return Err(EvalError::BaseNotInUnitDisk);
    }
    for (i, b) in spec.denominator.iter().enumerate() {
        if b.is_zero() {
            return Err(EvalError::GuardViolated(vec![Violation::DenominatorZero { index: i }]));
        }
    }
    let e = spec.sign_exponent();
    let one = Complex64::new(1.0, 0.0);
    let z = spec.argument.0;
    let mut num: Vec<Complex64> = spec.numerator.iter().map(|x| x.0).collect();
    let mut den: Vec<Complex64> = spec.denominator.iter().map(|x| x.0).collect();
    let q_e = q.powi(e as i32);
    let mut sign_pow = if e.rem_euclid(2) == 0 { one } else { -one };
    let mut qk = one;
    let mut term = one;
    let mut sum = one;
    for k in 0..MAX_TERMS {
        let top = num.iter().fold(one, |acc, a| acc * (one - a)) * sign_pow * z;
        let qk1 = qk * q;
        let bottom = den.iter().fold(one - qk1, |acc, b| acc * (one - b));
        if bottom.norm() == 0.0 {
            return Err(EvalError::PoleAtOmegaPoint);
        }
        let ratio = top / bottom;
        let next = term * ratio;
        if !next.is_finite() {
            return Err(EvalError::Divergent);
        }
        sum += next;
        if next.norm() == 0.0 {
            return Ok(FloatScalar(sum));
        }
        let rho = ratio.norm();
        let scale = sum.norm().max(f64::MIN_POSITIVE);
        if k >= 2 && rho < 1.0 && next.norm() * rho / (1.0 - rho) <= rel_tol * scale {
            return Ok(FloatScalar(sum));
        }
        term = next;
        for a in &mut num {
            *a *= q;
        }
        for b in &mut den {
            *b *= q;
        }
        qk = qk1;
        sign_pow *= q_e;
    }
    Err(EvalError::Divergent)
}

impl<S: Scalar> fmt::Display for SeriesSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |xs: &[S]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        let n = match self.termination {
            Termination::Terminating(n) => format!("q^-{n}"),
            Termination::Nonterminating => String::new(),
        };
        let mut upper = vec![];
        if !n.is_empty() {
            upper.push(n);
        }
        if !self.numerator.is_empty() {
            upper.push(list(&self.numerator));
        }
        match &self.kind {
            SeriesKind::Phi => write!(
                f,
                "phi[p={}]({}; {}; {}; {})",
                self.zeros,
                upper.join(", "),
                list(&self.denominator),
                self.base,
                self.argument
            ),
            SeriesKind::W { head } => write!(
                f,
                "W[p={}]({}; {}; {}; {})",
                self.zeros,
                head,
                upper.join(", "),
                self.base,
                self.argument
            ),
        }
    }
}
