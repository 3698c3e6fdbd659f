//! Symmetry properties of the polynomial families, checked exactly.

use proptest::prelude::*;
use qaskey::expr::{eval_expr, Expr};
use qaskey::polys::{eval_family, representations, FamilyId, FamilyPoint, PolyError};
use qaskey::transforms::q_inverse;
use qaskey::{ExactScalar, Scalar};

fn rational() -> impl Strategy<Value = ExactScalar> {
    (-9i64..=9, 1i64..=9).prop_filter("nonzero", |(p, _)| *p != 0).prop_map(|(p, r)| ExactScalar::ratio(p, r))
}

fn base() -> impl Strategy<Value = ExactScalar> {
    rational().prop_filter("|q| != 1", |q| q.modulus_cmp_one().is_ne())
}

fn family() -> impl Strategy<Value = FamilyId> {
    proptest::sample::select(FamilyId::POLYNOMIALS.to_vec())
}

fn inadmissible(e: &PolyError) -> bool {
    match e {
        PolyError::Inadmissible { reason, .. } => reason.is_inadmissible(),
        PolyError::NoAdmissibleRepresentation { .. } => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_representation_is_invariant_under_z_inversion(
        f in family(),
        params in proptest::collection::vec(rational(), 3),
        z in rational(),
        q in base(),
        n in 0u32..=4,
    ) {
        let params = params[..f.arity()].to_vec();
        let zi = z.inv().unwrap();
        for (i, rep) in representations(f).iter().enumerate() {
            if rep.expr.is_float_only() {
                continue;
            }
            let at_z = eval_family(f, &FamilyPoint::new(params.clone(), z.clone(), q.clone(), n), Some(i));
            let at_zi = eval_family(f, &FamilyPoint::new(params.clone(), zi.clone(), q.clone(), n), Some(i));
            match (at_z, at_zi) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b, "{} {}", f, rep.label),
                (Err(e), _) | (_, Err(e)) => prop_assert!(inadmissible(&e), "{e}"),
            }
        }
    }

    #[test]
    fn families_are_symmetric_in_their_parameters(
        f in family(),
        params in proptest::collection::vec(rational(), 3),
        z in rational(),
        q in base(),
        n in 0u32..=4,
    ) {
        let params = params[..f.arity()].to_vec();
        let reference = eval_family(f, &FamilyPoint::new(params.clone(), z.clone(), q.clone(), n), None);
        let mut perm = params.clone();
        // all permutations of up to three items via successive swaps
        for step in 0..6 {
            if perm.len() < 2 {
                break;
            }
            let i = step % (perm.len() - 1);
            perm.swap(i, i + 1);
            let other = eval_family(f, &FamilyPoint::new(perm.clone(), z.clone(), q.clone(), n), None);
            match (&reference, other) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, &b),
                (Err(e), _) => prop_assert!(inadmissible(e), "{e}"),
                (_, Err(e)) => prop_assert!(inadmissible(&e), "{e}"),
            }
        }
    }

    #[test]
    fn inverse_base_families_pair_with_their_q_counterparts(
        pair in proptest::sample::select(vec![
            (FamilyId::CDqInvHahn, FamilyId::CDqHahn),
            (FamilyId::ASCqInv, FamilyId::ASC),
            (FamilyId::CBqInvHermite, FamilyId::CBqHermite),
            (FamilyId::CqInvHermite, FamilyId::CqHermite),
        ]),
        params in proptest::collection::vec(rational(), 3),
        z in rational(),
        q in base(),
        n in 0u32..=4,
    ) {
        let (inv, fwd) = pair;
        let params = params[..inv.arity()].to_vec();
        let direct = eval_family(inv, &FamilyPoint::new(params.clone(), z.clone(), q.clone(), n), None);
        let Ok(direct) = direct else { return Ok(()) };

        // the first representation of the q-family, instantiated at base 1/q
        // and carried back to base q through the q <-> 1/q connection
        let rep = &representations(fwd)[0];
        let qi = q.inv().unwrap();
        let a = FamilyPoint::new(params, z, qi, n).assignment(fwd).unwrap();
        let series = rep.expr.series.as_ref().unwrap();
        let Ok(spec) = series.instantiate(&a) else { return Ok(()) };
        let Ok(moved) = q_inverse(&spec) else { return Ok(()) };
        prop_assert_eq!(&moved.target.base, &q);
        let outer = Expr { series: None, ..rep.expr.clone() };
        let Ok(outer) = eval_expr(&outer, &a) else { return Ok(()) };
        let Ok(value) = moved.value() else { return Ok(()) };
        prop_assert_eq!(outer.mul(&value), direct);
    }
}

#[test]
fn representation_agreement_at_a_fixed_point() {
    let r = ExactScalar::ratio;
    let params = [r(2, 3), r(-3, 5), r(5, 7)];
    for f in FamilyId::POLYNOMIALS {
        for n in 0..=5 {
            let p = FamilyPoint::new(params[..f.arity()].to_vec(), r(7, 4), r(3, 8), n);
            let values: Vec<ExactScalar> = representations(f)
                .iter()
                .enumerate()
                .filter(|(_, rep)| !rep.expr.is_float_only())
                .map(|(i, _)| eval_family(f, &p, Some(i)).unwrap())
                .collect();
            assert!(values.windows(2).all(|w| w[0] == w[1]), "{f} n={n}: {values:?}");
        }
    }
}
