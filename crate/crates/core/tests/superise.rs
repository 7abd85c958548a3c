use grlin_core::fixtures::{corpus, f2, f3, higher_tangent, vector_bundle, Jets};
use grlin_core::functors::{full_lin, full_lin_direct};
use grlin_core::graded_algebra::*;
use grlin_core::superise::*;
use proptest::prelude::*;

fn degree(bits: &[u8]) -> Z2kDegree {
    Z2kDegree::new(bits.to_vec())
}

#[test]
fn linearised_corpus_passes_the_sign_check() {
    let mut all = corpus();
    for k in 1..=4 {
        all.push(higher_tangent(k, 1, Jets::Derivative));
        all.push(higher_tangent(k, 2, Jets::Taylor));
    }
    for f in &all {
        for d in [full_lin_direct(f).unwrap(), full_lin(f).unwrap()] {
            let chk = z2k_sign_check(&d).unwrap();
            assert!(chk.violations.is_empty(), "{}: {}", d.name, chk.violations[0]);
            assert!(chk.report.passed());
            let s = superise(&d).unwrap();
            assert_eq!(s.presentation, d);
        }
    }
}

#[test]
fn violating_monomial_is_reported_with_its_pair() {
    let mut d = full_lin_direct(&f2()).unwrap();
    // y^(1,1) y^(1,0) has odd scalar product <(1,1),(1,0)> = 1
    let core = Var::fibre("z", Lift(3), 1);
    let side = Var::fibre("y", Lift(1), 1);
    let w = d.weight(&core).unwrap().clone();
    assert_eq!(w, vec![1, 1]);
    // the scan looks at monomials only, so the extra law need not be homogeneous
    d.blocks.push(grlin_core::bundle_model::Block::fibre("u", Lift(3), 1, vec![1, 1]));
    let u = Var::fibre("u", Lift(3), 1);
    let bad = &Poly::var(u.clone()) + &(&Poly::var(core.clone()) * &Poly::var(side.clone()));
    d.transitions[0].laws.insert(u.clone(), bad);
    let chk = z2k_sign_check(&d).unwrap();
    assert_eq!(chk.violations.len(), 1);
    let v = &chk.violations[0];
    assert_eq!(v.law, u);
    let mut pair = [v.pair.0.clone(), v.pair.1.clone()];
    pair.sort();
    let mut want = [side.clone(), core.clone()];
    want.sort();
    assert_eq!(pair, want);
    assert_eq!(v.degrees.0.dot(&v.degrees.1), 1);
    assert!(!chk.report.passed());
    assert!(superise(&d).is_err());
}

#[test]
fn odd_squares_are_violations() {
    let mut d = full_lin_direct(&vector_bundle(1, 1)).unwrap();
    let y = d.fibre_vars()[0].clone();
    d.transitions[0].laws.insert(y.clone(), &Poly::var(y.clone()) + &Poly::var(y.clone()).pow(2));
    let chk = z2k_sign_check(&d).unwrap();
    assert_eq!(chk.violations[0].pair, (y.clone(), y));
}

#[test]
fn degree_one_is_the_parity_shift() {
    let d = full_lin_direct(&vector_bundle(3, 2)).unwrap();
    let s = superise(&d).unwrap();
    assert_eq!(s.classes, vec![degree(&[1])]);
    assert_eq!(s.signs, vec![vec![-1]]);
    for c in s.coordinates.iter().filter(|c| !c.var.is_base()) {
        assert!(c.is_odd(), "{}", c.var);
    }
    assert_eq!(s.coordinates.iter().filter(|c| c.is_odd()).count(), 3);
    let ys = d.fibre_vars();
    assert_eq!(s.sign(&ys[0], &ys[1]), Some(-1));
    assert_eq!(s.sign(&ys[0], &d.base_vars()[0]), Some(1));
}

#[test]
fn double_vector_bundle_table() {
    let d = full_lin_direct(&f2()).unwrap();
    let s = superise(&d).unwrap();
    assert_eq!(s.classes, vec![degree(&[0, 1]), degree(&[1, 0]), degree(&[1, 1])]);
    assert_eq!(s.classes.iter().map(|g| g.parity()).collect::<Vec<_>>(), vec![1, 1, 0]);
    // (0,1) and (1,0) commute, the core anticommutes with both sides
    assert_eq!(s.signs, vec![vec![-1, 1, -1], vec![1, -1, -1], vec![-1, -1, 1]]);
    assert!(s.report.check("parity").unwrap().detail.starts_with("4 odd"));
}

#[test]
fn base_only_has_an_empty_table() {
    let m = higher_tangent(0, 2, Jets::Derivative);
    let s = superise(&m).unwrap();
    assert!(s.classes.is_empty());
    assert!(s.signs.is_empty());
    assert!(s.coordinates.iter().all(|c| !c.is_odd()));
}

#[test]
fn weights_above_one_are_not_k_fold() {
    assert!(degrees(&f2()).is_err());
    assert!(superise(&f3()).is_err());
}

#[test]
fn naive_reading_annihilates_the_quadratic_term() {
    let f = f2();
    let n = naive_superisation(&f).unwrap();
    assert!(!n.report.check("faithful").unwrap().passed);
    // y is odd, z even: the y y part of the z law is lost
    let lost: Vec<&(String, Var, Poly)> = n.annihilated.iter().collect();
    assert_eq!(lost.len(), 2);
    for (_, v, p) in lost {
        assert_eq!(v.name.as_ref() as &str, "z");
        assert!(p.terms().all(|(m, _)| m.degree_where(|u| &*u.name == "y") == 2));
        let kept = &n.reduced.transitions[0].laws[v];
        assert!(kept.terms().all(|(m, _)| m.degree_where(|u| &*u.name == "y") == 0));
    }
    // a vector bundle reads faithfully
    assert!(naive_superisation(&vector_bundle(2, 1)).unwrap().report.passed());
}

proptest! {
    #[test]
    fn sign_is_a_bicharacter(a in prop::collection::vec(0u8..2, 3), b in prop::collection::vec(0u8..2, 3), c in prop::collection::vec(0u8..2, 3)) {
        let (a, b, c) = (degree(&a), degree(&b), degree(&c));
        let sum = Z2kDegree::new(b.bits.iter().zip(&c.bits).map(|(x, y)| x ^ y).collect());
        prop_assert_eq!(a.sign(&sum), a.sign(&b) * a.sign(&c));
        prop_assert_eq!(a.sign(&b), b.sign(&a));
        prop_assert_eq!(a.parity(), (a.bits.iter().map(|x| *x as u32).sum::<u32>() % 2) as u8);
    }
}

#[test]
fn superisation_keeps_every_coordinate() {
    for k in 1..4 {
        for m in 1..3 {
            let d = full_lin_direct(&higher_tangent(k, m, Jets::Derivative)).unwrap();
            let s = superise(&d).unwrap();
            assert_eq!(s.coordinates.len(), d.vars().len());
            assert_eq!(s.coordinates.iter().filter(|c| !c.degree.is_zero()).count(), d.fibre_vars().len());
        }
    }
}
