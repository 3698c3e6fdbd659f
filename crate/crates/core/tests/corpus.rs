//! Registry shape, sampling, verification and scheme checks against the
//! bundled corpus.

use qaskey::corpus::scheme::{scheme_graph, ASKEY_WILSON};
use qaskey::corpus::{
    check_remark, corpus, enumerate_variants, lookup, mutate, parse_corpus, registry, sample_point, verify,
    IdentityKind, SamplePlan, VariantGroup,
};
use qaskey::expr::eval_expr;
use qaskey::{ExactScalar, Mode, Scalar};

fn plan(seed: u64, trials: usize, n_max: u32) -> SamplePlan {
    SamplePlan { seed, trials, n_values: (0..=n_max).collect(), ..SamplePlan::default() }
}

#[test]
fn member_counts_match_the_displayed_chains() {
    let expected = [
        ("cor4.3", 13),
        ("cor4.13", 13),
        ("cor4.4", 6),
        ("cor4.12-W", 6),
        ("cor4.5", 3),
        ("cor4.9", 3),
        ("cor5.8", 11),
        ("cor5.14b", 11),
        ("cor5.5", 2),
        ("cor6.6a", 8),
        ("cor6.11", 8),
        ("cor7.4a", 4),
        ("cor7.8", 4),
    ];
    for (id, count) in expected {
        let ident = lookup(id).unwrap_or_else(|| panic!("{id} missing"));
        assert_eq!(ident.members.len(), count, "{id}");
    }
}

#[test]
fn polynomial_chains_expand_roles() {
    for (id, templates, members) in [("cor4.1", 8, 21), ("cor4.11", 8, 21), ("cor5.1", 7, 11), ("cor5.9", 7, 11)] {
        let ident = lookup(id).unwrap();
        assert_eq!((ident.templates.len(), ident.members.len()), (templates, members), "{id}");
        assert!(ident.uses_z);
    }
}

#[test]
fn every_identity_has_a_kind_and_summations_have_closed_forms() {
    assert!(registry().len() >= 40);
    for ident in registry() {
        assert!(!ident.members.is_empty(), "{}", ident.id);
        assert_eq!(ident.kind == IdentityKind::Summation, ident.closed_form.is_some(), "{}", ident.id);
        assert!(!ident.reference.is_empty() && !ident.quote.is_empty(), "{}", ident.id);
    }
}

#[test]
fn terminating_very_well_poised_sum_is_a_kronecker_delta() {
    let ident = lookup("cor7.3a").unwrap();
    let closed = ident.closed_form.as_ref().unwrap();
    let p = plan(3, 4, 5);
    for t in 0..p.trials {
        let point = sample_point(ident, &p, t).unwrap();
        for n in 0..=5 {
            let a = point.at(ident, n).unwrap();
            let expected = if n == 0 { ExactScalar::one() } else { ExactScalar::zero() };
            assert_eq!(eval_expr(closed, &a).unwrap(), expected);
            for m in &ident.members {
                assert_eq!(eval_expr(&m.expr, &a).unwrap(), expected, "{} n={n}", m.label);
            }
        }
    }
}

#[test]
fn sampling_is_deterministic_and_seed_dependent() {
    let ident = lookup("cor4.4").unwrap();
    let p = plan(11, 5, 3);
    let a: Vec<_> = (0..5).map(|t| sample_point(ident, &p, t).unwrap()).collect();
    let b: Vec<_> = (0..5).map(|t| sample_point(ident, &p, t).unwrap()).collect();
    assert_eq!(a, b);
    let c: Vec<_> = (0..5).map(|t| sample_point(ident, &plan(12, 5, 3), t).unwrap()).collect();
    assert_ne!(a, c);
    for point in &a {
        assert!(point.q.modulus_cmp_one().is_ne());
        assert!(point.values.values().all(|v| !v.is_zero()));
    }
}

#[test]
fn watson_balance_is_solved_not_sampled() {
    let ident = lookup("watson").unwrap();
    assert_eq!(ident.solved.len(), 1);
    let (name, _) = &ident.solved[0];
    assert!(!ident.params.contains(name));
    let point = sample_point(ident, &plan(0, 1, 3), 0).unwrap();
    let a = point.at(ident, 2).unwrap();
    assert!(a.values.contains_key(name));
}

#[test]
fn a_transformation_chain_verifies_exactly() {
    let report = verify(lookup("cor4.3").unwrap(), &plan(0, 6, 4), Mode::Exact).unwrap();
    assert!(report.passed(), "{:?}", report.counterexamples);
    assert_eq!(report.trials_run, 6);
    assert_eq!(report.members, 13);
}

#[test]
fn verification_reports_do_not_depend_on_timing() {
    let ident = lookup("cor5.5").unwrap();
    let mut a = verify(ident, &plan(4, 5, 3), Mode::Exact).unwrap();
    let mut b = verify(ident, &plan(4, 5, 3), Mode::Exact).unwrap();
    a.wall_time = None;
    b.wall_time = None;
    assert_eq!(a, b);
}

#[test]
fn all_documented_substitutions_carry_families_onto_their_targets() {
    let c = corpus();
    assert!(!c.remarks.is_empty());
    for r in &c.remarks {
        let source = c.identity(&r.source).unwrap();
        let (_, target) = c.find_member(&r.target).unwrap();
        let check = check_remark(r, source, &target.expr);
        assert!(check.passed(), "{}: unmatched {:?}", r.id, check.unmatched);
    }
}

#[test]
fn variant_counts() {
    let counts: Vec<usize> = VariantGroup::ALL.iter().map(|g| enumerate_variants(*g).count).collect();
    assert_eq!(counts, [72, 72, 8, 8]);
}

#[test]
fn scheme_graph_shape() {
    let g = scheme_graph();
    assert_eq!(g.family_nodes().count(), 14);
    assert_eq!(g.family_edges().count(), 18);
    assert_eq!(g.nodes.iter().filter(|n| n.id == ASKEY_WILSON).count(), 1);
    let dot = g.to_dot();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("CBqHermite -> ZnMinus [label=\"c→∞\"]"), "{dot}");
    for e in &g.edges {
        assert!(g.nodes.iter().any(|n| n.id == e.source) && g.nodes.iter().any(|n| n.id == e.target));
    }
}

#[test]
fn parse_errors_carry_file_and_line() {
    let text = "[identity ok kind=chain ref=\"x\" quote=\"y\"]\nmember[ok:1]: poch(a; q; n)\nmember[ok:2]: poch(a; q; \n";
    let err = parse_corpus("broken.qk", text).unwrap_err();
    assert_eq!(err.file, "broken.qk");
    assert_eq!(err.line, 3);
    assert!(err.to_string().starts_with("broken.qk:3:"), "{err}");

    let err = parse_corpus("kind.qk", "[identity x kind=lemma ref=\"r\" quote=\"q\"]\n").unwrap_err();
    assert_eq!(err.line, 1);
}

#[test]
fn single_token_mutations_are_caught() {
    let ident = lookup("cor4.4").unwrap();
    for seed in 0..5 {
        let (mutant, m) = mutate(ident, seed).unwrap();
        let report = verify(&mutant, &plan(seed, 5, 4), Mode::Exact).unwrap();
        assert!(!report.passed(), "seed {seed}: {} {} not detected", m.member, m.description);
    }
}

#[test]
fn the_documented_example_parses_and_holds() {
    let doc = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/dsl.md")).unwrap();
    let start = doc.find("# q-Chu-Vandermonde").expect("example block");
    let block = &doc[start..start + doc[start..].find("```").unwrap()];
    let c = parse_corpus("dsl.md", block).unwrap();
    assert_eq!((c.identities.len(), c.remarks.len()), (1, 1));
    let report = verify(&c.identities[0], &plan(3, 10, 5), Mode::Exact).unwrap();
    assert!(report.passed(), "{:?}", report.counterexamples);
}
