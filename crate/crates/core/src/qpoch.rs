//! q-Pochhammer symbols and the standard identities they satisfy.

use num_complex::Complex64;

use crate::error::{EvalError, Violation};
use crate::scalar::{FloatScalar, Scalar};

/// Length of a Pochhammer product: `constant + per_n·n`, or infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PochLength {
    Finite { constant: i64, per_n: i64 },
    Infinite,
}

impl PochLength {
    pub const N: PochLength = PochLength::Finite { constant: 0, per_n: 1 };
    pub const TWO_N: PochLength = PochLength::Finite { constant: 0, per_n: 2 };

    pub fn constant(c: i64) -> Self {
        PochLength::Finite { constant: c, per_n: 0 }
    }

    /// The concrete length at `n`; `None` for an infinite product.
    pub fn at(&self, n: u32) -> Result<Option<u32>, EvalError> {
        match *self {
            PochLength::Infinite => Ok(None),
            PochLength::Finite { constant, per_n } => {
                let len = constant + per_n * i64::from(n);
                u32::try_from(len).map(Some).map_err(|_| EvalError::NegativeLength(len))
            }
        }
    }
}

/// `(a;q)_n = (1−a)(1−aq)…(1−aq^{n−1})`.
pub fn qpoch<S: Scalar>(a: &S, q: &S, n: u32) -> S {
    let one = S::one();
    let mut acc = S::one();
    let mut term = a.clone();
    for j in 0..n {
        acc = acc.mul(&one.sub(&term));
        if j + 1 < n {
            term = term.mul(q);
        }
    }
    acc
}

/// `(a_1, …, a_k; q)_n`, the product of the individual symbols.
pub fn qpoch_multi<S: Scalar>(args: &[S], q: &S, n: u32) -> S {
    args.iter().fold(S::one(), |acc, a| acc.mul(&qpoch(a, q, n)))
}

/// The `k` with `a·q^k = 1` and `k < n`, i.e. the index at which
/// `(a;q)_n` vanishes. Tested exactly in exact mode.
pub fn omega_index<S: Scalar>(a: &S, q: &S, n: u32) -> Option<u32> {
    let one = S::one();
    let mut x = a.clone();
    for k in 0..n {
        if x == one {
            return Some(k);
        }
        x = x.mul(q);
    }
    None
}

/// `(a;q)_∞`, truncated once `|a q^N| / (1 − |q|)` drops below `rel_tol`.
pub fn qpoch_inf(a: &FloatScalar, q: &FloatScalar, rel_tol: f64) -> Result<FloatScalar, EvalError> {
    let qa = q.abs();
    if qa >= 1.0 {
        return Err(EvalError::BaseNotInUnitDisk);
    }
    let one = Complex64::new(1.0, 0.0);
    let mut acc = one;
    let mut term = a.0;
    let mut steps = 0usize;
    while term.norm() / (1.0 - qa) >= rel_tol {
        acc *= one - term;
        term *= q.0;
        steps += 1;
        if steps > 1_000_000 {
            return Err(EvalError::Divergent);
        }
    }
    Ok(FloatScalar(acc))
}

/// `(a;q)_b = (a;q)_∞ / (a q^b;q)_∞` for complex `b`, `|q| < 1`.
pub fn qpoch_general(
    a: &FloatScalar,
    q: &FloatScalar,
    b: &FloatScalar,
    rel_tol: f64,
) -> Result<FloatScalar, EvalError> {
    if q.abs() >= 1.0 {
        return Err(EvalError::BaseNotInUnitDisk);
    }
    let shifted = FloatScalar(a.0 * (b.0 * q.0.ln()).exp());
    let mut x = shifted.0;
    while x.norm() >= rel_tol * 1e-3 {
        if (x - 1.0).norm() <= rel_tol {
            return Err(EvalError::PoleAtOmegaPoint);
        }
        x *= q.0;
    }
    let num = qpoch_inf(a, q, rel_tol * 1e-3)?;
    let den = qpoch_inf(&shifted, q, rel_tol * 1e-3)?;
    Ok(FloatScalar(num.0 / den.0))
}

// ---------------------------------------------------------------------------
// Identity suite
// ---------------------------------------------------------------------------

/// Named Pochhammer identities, each checkable as `lhs − rhs`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PochIdentity {
    /// `(a;q^{-1})_n = (a^{-1};q)_n (−a)^n q^{-binom(n,2)}`.
    InverseBase,
    /// `a^n (x/a;q)_n = q^{binom(n,2)} (−x)^n (a/x;q^{-1})_n`; `x` is taken from `b`.
    InverseBaseScaled,
    /// `(a;q)_{n+k} = (a;q)_k (aq^k;q)_n`.
    SplitLeft,
    /// `(a;q)_{n+k} = (a;q)_n (aq^n;q)_k`.
    SplitRight,
    /// `(a;q)_n = (q^{1−n}/a;q)_n (−a)^n q^{binom(n,2)}`.
    Reversal,
    /// `(aq^{-n};q)_k = q^{-nk} (q/a;q)_n / (q^{1−k}/a;q)_n · (a;q)_k`.
    ShiftedStart,
    /// `(a;q)_{2n} = (a, aq; q²)_n`.
    Doubling,
    /// `(a;q)_{2n} = (±√a, ±√(qa); q)_n` with `a = s²`.
    DoublingSqrt,
    /// `(aq^n;q)_n = (±√a, ±√(aq); q)_n / (a;q)_n` with `a = s²`.
    ShiftedBlock,
    /// `(q^{-n}a;q)_n = q^{-binom(n,2)} (−a/q)^n (q/a;q)_n`.
    NegShift,
    /// `(q^{-n}a;q)_{2n} = q^{-binom(n,2)} (−a/q)^n (a;q)_n (q/a;q)_n`.
    NegShiftDouble,
    /// `(q^{-n}a;q)_n / (q^{-n}b;q)_n = (a/b)^n (q/a;q)_n / (q/b;q)_n`.
    NegShiftRatio,
    /// `(q^{-2n}a;q)_n / (q^{-2n}b;q)_n = (a/b)^n (q/b;q)_n (q/a;q)_{2n} / ((q/a;q)_n (q/b;q)_{2n})`.
    NegShiftDoubleRatio,
}

impl PochIdentity {
    pub const ALL: [PochIdentity; 13] = [
        PochIdentity::InverseBase,
        PochIdentity::InverseBaseScaled,
        PochIdentity::SplitLeft,
        PochIdentity::SplitRight,
        PochIdentity::Reversal,
        PochIdentity::ShiftedStart,
        PochIdentity::Doubling,
        PochIdentity::DoublingSqrt,
        PochIdentity::ShiftedBlock,
        PochIdentity::NegShift,
        PochIdentity::NegShiftDouble,
        PochIdentity::NegShiftRatio,
        PochIdentity::NegShiftDoubleRatio,
    ];

    /// Whether the identity is stated with square roots and is checked
    /// under `a = s²` (and optionally `q = t²`).
    pub fn uses_sqrt(self) -> bool {
        matches!(self, PochIdentity::DoublingSqrt | PochIdentity::ShiftedBlock)
    }
}

/// A sample point for [`poch_identity_residual`].
///
/// For square-root identities `a` is read as `s` (so the identity's `a` is
/// `s²`); when `t` is present the base is `t²` and `√(qa) = s·t` literally,
/// otherwise the `±√(qa)` pair is evaluated as `(qa;q²)_n`.
#[derive(Clone, Debug)]
pub struct PochPoint<S> {
    pub a: S,
    pub b: S,
    pub q: S,
    pub n: u32,
    pub k: u32,
    pub t: Option<S>,
}

fn binom2(n: u32) -> i64 {
    let n = i64::from(n);
    n * (n - 1) / 2
}

fn nonzero<S: Scalar>(x: &S, what: &str) -> Result<(), EvalError> {
    if x.is_zero() {
        Err(EvalError::GuardViolated(vec![Violation::Pole(what.to_string())]))
    } else {
        Ok(())
    }
}

fn guarded_div<S: Scalar>(num: &S, den: &S, what: &str) -> Result<S, EvalError> {
    nonzero(den, what)?;
    Ok(num.div(den)?)
}

/// `lhs − rhs` of `id` at `pt`. Zero in exact mode whenever the guards pass.
pub fn poch_identity_residual<S: Scalar>(id: PochIdentity, pt: &PochPoint<S>) -> Result<S, EvalError> {
    let (lhs, rhs) = poch_identity_sides(id, pt)?;
    Ok(lhs.sub(&rhs))
}

/// Both sides of `id` at `pt`.
pub fn poch_identity_sides<S: Scalar>(id: PochIdentity, pt: &PochPoint<S>) -> Result<(S, S), EvalError> {
    let n = pt.n;
    let k = pt.k;
    let q = &pt.q;
    let b2 = binom2(n);
    let qn = q.pow_int(i64::from(n))?;
    let a = &pt.a;
    Ok(match id {
        PochIdentity::InverseBase => {
            nonzero(a, "a")?;
            let lhs = qpoch(a, &q.inv()?, n);
            let rhs = qpoch(&a.inv()?, q, n)
                .mul(&a.neg().pow_int(i64::from(n))?)
                .mul(&q.pow_int(-b2)?);
            (lhs, rhs)
        }
        PochIdentity::InverseBaseScaled => {
            nonzero(a, "a")?;
            let x = &pt.b;
            nonzero(x, "x")?;
            let lhs = a.pow_int(i64::from(n))?.mul(&qpoch(&x.div(a)?, q, n));
            let rhs = q
                .pow_int(b2)?
                .mul(&x.neg().pow_int(i64::from(n))?)
                .mul(&qpoch(&a.div(x)?, &q.inv()?, n));
            (lhs, rhs)
        }
        PochIdentity::SplitLeft => {
            let lhs = qpoch(a, q, n + k);
            let rhs = qpoch(a, q, k).mul(&qpoch(&a.mul(&q.pow_int(i64::from(k))?), q, n));
            (lhs, rhs)
        }
        PochIdentity::SplitRight => {
            let lhs = qpoch(a, q, n + k);
            let rhs = qpoch(a, q, n).mul(&qpoch(&a.mul(&qn), q, k));
            (lhs, rhs)
        }
        PochIdentity::Reversal => {
            nonzero(a, "a")?;
            let lhs = qpoch(a, q, n);
            let rhs = qpoch(&q.pow_int(1 - i64::from(n))?.div(a)?, q, n)
                .mul(&a.neg().pow_int(i64::from(n))?)
                .mul(&q.pow_int(b2)?);
            (lhs, rhs)
        }
        PochIdentity::ShiftedStart => {
            nonzero(a, "a")?;
            let lhs = qpoch(&a.mul(&qn.inv()?), q, k);
            let den = qpoch(&q.pow_int(1 - i64::from(k))?.div(a)?, q, n);
            let rhs = q
                .pow_int(-i64::from(n) * i64::from(k))?
                .mul(&guarded_div(&qpoch(&q.div(a)?, q, n), &den, "(q^{1-k}/a;q)_n")?)
                .mul(&qpoch(a, q, k));
            (lhs, rhs)
        }
        PochIdentity::Doubling => {
            let q2 = q.mul(q);
            let lhs = qpoch(a, q, 2 * n);
            let rhs = qpoch_multi(&[a.clone(), a.mul(q)], &q2, n);
            (lhs, rhs)
        }
        PochIdentity::DoublingSqrt | PochIdentity::ShiftedBlock => {
            let s = a;
            let (base, sqrt_pair) = match &pt.t {
                Some(t) => {
                    let base = t.mul(t);
                    let st = s.mul(t);
                    (base.clone(), qpoch_multi(&[st.clone(), st.neg()], &base, n))
                }
                None => {
                    let aq = s.mul(s).mul(q);
                    (q.clone(), qpoch(&aq, &q.mul(q), n))
                }
            };
            let a_val = s.mul(s);
            let roots = qpoch_multi(&[s.clone(), s.neg()], &base, n).mul(&sqrt_pair);
            if id == PochIdentity::DoublingSqrt {
                (qpoch(&a_val, &base, 2 * n), roots)
            } else {
                let qn = base.pow_int(i64::from(n))?;
                let lhs = qpoch(&a_val.mul(&qn), &base, n);
                let den = qpoch(&a_val, &base, n);
                (lhs, guarded_div(&roots, &den, "(a;q)_n")?)
            }
        }
        PochIdentity::NegShift => {
            nonzero(a, "a")?;
            let lhs = qpoch(&a.div(&qn)?, q, n);
            let rhs = q
                .pow_int(-b2)?
                .mul(&a.neg().div(q)?.pow_int(i64::from(n))?)
                .mul(&qpoch(&q.div(a)?, q, n));
            (lhs, rhs)
        }
        PochIdentity::NegShiftDouble => {
            nonzero(a, "a")?;
            let lhs = qpoch(&a.div(&qn)?, q, 2 * n);
            let rhs = q
                .pow_int(-b2)?
                .mul(&a.neg().div(q)?.pow_int(i64::from(n))?)
                .mul(&qpoch(a, q, n))
                .mul(&qpoch(&q.div(a)?, q, n));
            (lhs, rhs)
        }
        PochIdentity::NegShiftRatio => {
            let b = &pt.b;
            nonzero(a, "a")?;
            nonzero(b, "b")?;
            let lhs = guarded_div(
                &qpoch(&a.div(&qn)?, q, n),
                &qpoch(&b.div(&qn)?, q, n),
                "(q^{-n}b;q)_n",
            )?;
            let rhs = a.div(b)?.pow_int(i64::from(n))?.mul(&guarded_div(
                &qpoch(&q.div(a)?, q, n),
                &qpoch(&q.div(b)?, q, n),
                "(q/b;q)_n",
            )?);
            (lhs, rhs)
        }
        PochIdentity::NegShiftDoubleRatio => {
            let b = &pt.b;
            nonzero(a, "a")?;
            nonzero(b, "b")?;
            let q2n = qn.mul(&qn);
            let lhs = guarded_div(
                &qpoch(&a.div(&q2n)?, q, n),
                &qpoch(&b.div(&q2n)?, q, n),
                "(q^{-2n}b;q)_n",
            )?;
            let qa = q.div(a)?;
            let qb = q.div(b)?;
            let num = qpoch(&qb, q, n).mul(&qpoch(&qa, q, 2 * n));
            let den = qpoch(&qa, q, n).mul(&qpoch(&qb, q, 2 * n));
            let rhs = a.div(b)?.pow_int(i64::from(n))?.mul(&guarded_div(&num, &den, "(q/a;q)_n (q/b;q)_2n")?);
            (lhs, rhs)
        }
    })
}

/// `|(aλ;q)_n / (bλ;q)_n − (a/b)^n|` along a ladder of `λ` values.
pub fn limit_ratio_ladder(
    a: &FloatScalar,
    b: &FloatScalar,
    q: &FloatScalar,
    n: u32,
    ladder: &[f64],
) -> Result<Vec<f64>, EvalError> {
    let target = a.div(b)?.pow_int(i64::from(n))?;
    ladder
        .iter()
        .map(|&lam| {
            let l = FloatScalar::new(lam, 0.0);
            let num = qpoch(&a.mul(&l), q, n);
            let den = qpoch(&b.mul(&l), q, n);
            let v = guarded_div(&num, &den, "(b lambda;q)_n")?;
            Ok((v.0 - target.0).norm())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ExactScalar;

    fn r(n: i64, d: i64) -> ExactScalar {
        ExactScalar::ratio(n, d)
    }

    #[test]
    fn finite_products() {
        let q = r(1, 2);
        assert_eq!(qpoch(&r(7, 3), &q, 0), ExactScalar::one());
        // (1−3)(1−3/2)(1−3/4)
        assert_eq!(qpoch(&r(3, 1), &q, 3), r(1, 4));
        // (1−1/2)(1−1/4)
        assert_eq!(qpoch(&q, &q, 2), r(3, 8));
    }

    #[test]
    fn multi_products() {
        assert_eq!(qpoch_multi::<ExactScalar>(&[], &r(1, 2), 4), ExactScalar::one());
        assert_eq!(qpoch_multi(&[r(2, 1), r(-2, 1)], &r(1, 3), 1), r(-3, 1));
        assert_eq!(qpoch_multi(&[r(3, 1)], &r(1, 2), 3), r(1, 4));
    }

    #[test]
    fn zero_iff_in_omega() {
        let q = r(1, 3);
        for k in 0..5u32 {
            let a = q.pow_int(-i64::from(k)).unwrap();
            for n in 0..6u32 {
                assert_eq!(qpoch(&a, &q, n).is_zero(), k < n);
                assert_eq!(omega_index(&a, &q, n), (k < n).then_some(k));
            }
        }
        assert_eq!(omega_index(&r(2, 1), &q, 6), None);
    }

    #[test]
    fn infinite_products() {
        let q = FloatScalar::new(0.5, 0.0);
        assert_eq!(qpoch_inf(&FloatScalar::zero(), &q, 1e-12).unwrap(), FloatScalar::one());
        assert!(qpoch_inf(&FloatScalar::one(), &q, 1e-12).unwrap().is_zero());
        let direct = (0..60).fold(1.0f64, |acc, j| acc * (1.0 - 0.5 * 0.5f64.powi(j)));
        let v = qpoch_inf(&q, &q, 1e-12).unwrap();
        assert!((v.0.re - direct).abs() < 1e-12);
        assert_eq!(qpoch_inf(&q, &FloatScalar::new(1.5, 0.0), 1e-12), Err(EvalError::BaseNotInUnitDisk));
    }

    #[test]
    fn general_length() {
        let q = FloatScalar::new(0.5, 0.0);
        let a = FloatScalar::new(3.0, 0.0);
        let v = qpoch_general(&a, &q, &FloatScalar::zero(), 1e-12).unwrap();
        assert!((v.0 - 1.0).norm() < 1e-12);
        let v = qpoch_general(&a, &q, &FloatScalar::new(3.0, 0.0), 1e-12).unwrap();
        assert!((v.0 - 0.25).norm() < 1e-10);
        let v = qpoch_general(&FloatScalar::zero(), &q, &FloatScalar::new(0.7, 0.2), 1e-12).unwrap();
        assert!((v.0 - 1.0).norm() < 1e-12);
        // a q^b = 1 puts the denominator product at a zero.
        let pole = qpoch_general(&FloatScalar::new(4.0, 0.0), &q, &FloatScalar::new(2.0, 0.0), 1e-12);
        assert_eq!(pole, Err(EvalError::PoleAtOmegaPoint));
    }

    #[test]
    fn inverse_base_example() {
        // (2;1/3)_2 = (1−2)(1−2/3) = −1/3 and (1/2;3)_2 · 4 · 3^{-1} = −1/3.
        let pt = PochPoint { a: r(2, 1), b: r(1, 1), q: r(3, 1), n: 2, k: 0, t: None };
        let (lhs, rhs) = poch_identity_sides(PochIdentity::InverseBase, &pt).unwrap();
        assert_eq!(lhs, r(-1, 3));
        assert_eq!(rhs, r(-1, 3));
    }

    #[test]
    fn reversal_at_n_zero() {
        let pt = PochPoint { a: r(5, 7), b: r(1, 1), q: r(2, 9), n: 0, k: 0, t: None };
        let (lhs, rhs) = poch_identity_sides(PochIdentity::Reversal, &pt).unwrap();
        assert_eq!((lhs, rhs), (ExactScalar::one(), ExactScalar::one()));
    }

    #[test]
    fn shifted_block_example() {
        // a = s² = 4, q = 1/3, n = 1: (4/3;1/3)_1 = −1/3.
        let pt = PochPoint { a: r(2, 1), b: r(1, 1), q: r(1, 3), n: 1, k: 0, t: None };
        let (lhs, rhs) = poch_identity_sides(PochIdentity::ShiftedBlock, &pt).unwrap();
        assert_eq!(lhs, r(-1, 3));
        assert_eq!(rhs, lhs);
    }

    #[test]
    fn guards_are_reported() {
        let pt = PochPoint { a: r(0, 1), b: r(1, 1), q: r(1, 3), n: 2, k: 0, t: None };
        assert!(matches!(
            poch_identity_residual(PochIdentity::Reversal, &pt),
            Err(EvalError::GuardViolated(_))
        ));
        // a = 1 makes (a;q)_n vanish in the block identity.
        let pt = PochPoint { a: r(1, 1), b: r(1, 1), q: r(1, 3), n: 2, k: 0, t: None };
        assert!(matches!(
            poch_identity_residual(PochIdentity::ShiftedBlock, &pt),
            Err(EvalError::GuardViolated(_))
        ));
    }

    #[test]
    fn limit_ratio_decreases() {
        let ladder: Vec<f64> = (10..=20).map(|e| 2f64.powi(e)).collect();
        let errs = limit_ratio_ladder(
            &FloatScalar::new(3.0, 0.0),
            &FloatScalar::new(5.0, 0.0),
            &FloatScalar::new(1.5, 0.0),
            3,
            &ladder,
        )
        .unwrap();
        assert!(errs.windows(2).all(|w| w[1] < w[0]));
        assert!(*errs.last().unwrap() < 1e-6);
    }
}
