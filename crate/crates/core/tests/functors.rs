mod common;

use std::collections::BTreeMap;

use common::{base_law, einstein, Factor, L1, L2, L3, NONE};
use grlin_core::bundle_model::morphism::{validate_morphism, CheckOptions, Morphism, WeightMatch};
use grlin_core::bundle_model::numeric::{sample_points, NumericInstance};
use grlin_core::bundle_model::{fixed_locus, validate, Presentation};
use grlin_core::fixtures::{corpus, f2, f3, f4, graded, higher_tangent, vector_bundle, GradedSpec, Jets};
use grlin_core::functors::*;
use grlin_core::graded_algebra::{perm, q, Lift, Poly, Var, Q};

fn dims2() -> BTreeMap<&'static str, u32> {
    [("y", 2), ("z", 2), ("w", 2)].into_iter().collect()
}

fn half() -> Q {
    q(1, 2)
}

fn one() -> Q {
    q(1, 1)
}

/// Expected law of each coordinate, from the index-notation formulas for `F3`.
fn assert_laws(p: &Presentation, expected: &BTreeMap<Var, Poly>) {
    let t = &p.transitions[0];
    let got: Vec<&Var> = t.laws.keys().collect();
    let want: Vec<&Var> = expected.keys().collect();
    assert_eq!(got, want, "coordinate sets differ");
    for (v, law) in expected {
        assert_eq!(&t.laws[v], law, "law of {v}");
    }
}

fn block_laws(name: &'static str, lift: Lift, terms: &[(Q, &[Factor])]) -> Vec<(Var, Poly)> {
    let d = dims2();
    (1..=d[name]).map(|i| {
        let v = Var::fibre(name, lift, i);
        let law = einstein(&v, &d, terms);
        (v, law)
    }).collect()
}

#[test]
fn plin_f3_reproduces_printed_laws() {
    let mut want = BTreeMap::new();
    want.insert(Var::base("x", 1), base_law(1));
    want.extend(block_laws("y", NONE, &[(one(), &[("y", NONE)])]));
    want.extend(block_laws("z", NONE, &[(one(), &[("z", NONE)]), (half(), &[("y", NONE), ("y", NONE)])]));
    // ẏ, ż, ẇ
    want.extend(block_laws("y", L1, &[(one(), &[("y", L1)])]));
    want.extend(block_laws("z", L1, &[(one(), &[("z", L1)]), (one(), &[("y", L1), ("y", NONE)])]));
    want.extend(block_laws(
        "w",
        L1,
        &[
            (one(), &[("w", L1)]),
            (one(), &[("z", L1), ("y", NONE)]),
            (one(), &[("z", NONE), ("y", L1)]),
            (half(), &[("y", L1), ("y", NONE), ("y", NONE)]),
        ],
    ));
    let p = plin(&f3()).unwrap();
    assert_laws(&p, &want);
    let weights: BTreeMap<(&str, Lift), Vec<u32>> = p.blocks.iter().map(|b| ((&*b.name, b.lift), b.weight.clone())).collect();
    assert_eq!(weights[&("y", L1)], vec![0, 1]);
    assert_eq!(weights[&("y", NONE)], vec![1, 0]);
    assert_eq!(weights[&("z", L1)], vec![1, 1]);
    assert_eq!(weights[&("z", NONE)], vec![2, 0]);
    assert_eq!(weights[&("w", L1)], vec![2, 1]);
}

#[test]
fn full_lin_f3_reproduces_printed_d_laws() {
    let mut want = BTreeMap::new();
    want.insert(Var::base("x", 1), base_law(1));
    want.extend(block_laws("y", NONE, &[(one(), &[("y", NONE)])]));
    want.extend(block_laws("y", L1, &[(one(), &[("y", L1)])]));
    want.extend(block_laws("z", L1, &[(one(), &[("z", L1)]), (one(), &[("y", L1), ("y", NONE)])]));
    // dy, dż, dz, dẇ
    want.extend(block_laws("y", L2, &[(one(), &[("y", L2)])]));
    want.extend(block_laws("z", L3, &[(one(), &[("z", L3)]), (one(), &[("y", L1), ("y", L2)])]));
    want.extend(block_laws("z", L2, &[(one(), &[("z", L2)]), (one(), &[("y", L2), ("y", NONE)])]));
    want.extend(block_laws(
        "w",
        L3,
        &[
            (one(), &[("w", L3)]),
            (one(), &[("z", L1), ("y", L2)]),
            (one(), &[("z", L3), ("y", NONE)]),
            (one(), &[("z", L2), ("y", L1)]),
            (one(), &[("y", L1), ("y", L2), ("y", NONE)]),
        ],
    ));
    let lin = full_lin(&f3()).unwrap();
    assert_laws(&lin, &want);
    for b in &lin.blocks {
        assert!(b.weight.iter().all(|w| *w <= 1), "{} has weight {:?}", b.name, b.weight);
    }
}

#[test]
fn tangent_lift_of_base_change_is_tangent_bundle() {
    let m = higher_tangent(0, 2, Jets::Derivative);
    let t = tangent_lift(&m);
    let tm = higher_tangent(1, 2, Jets::Derivative);
    let renamed = t.rename(|v| if v.lift.bit(0) { Var::fibre("dx", Lift::NONE, v.index) } else { v.clone() });
    assert_eq!(renamed.transitions[0].laws, tm.transitions[0].laws);
}

#[test]
fn vertical_f2_weights() {
    let v = vertical(&f2()).unwrap();
    let mut got: Vec<(String, u32, Vec<u32>)> = v.blocks.iter().map(|b| (b.name.to_string(), b.lift.0, b.weight.clone())).collect();
    got.sort();
    assert_eq!(
        got,
        vec![
            ("x".into(), 0, vec![0, 0]),
            ("y".into(), 0, vec![1, 0]),
            ("y".into(), 1, vec![0, 1]),
            ("z".into(), 0, vec![2, 0]),
            ("z".into(), 1, vec![1, 1]),
        ]
    );
    assert!(validate(&v).passed());
}

#[test]
fn vertical_shift_audit_on_f3() {
    let f = f3();
    let v = vertical(&f).unwrap();
    for b in v.blocks.iter().filter(|b| b.lift.bit(0)) {
        let w = f.block(&b.name, Lift::NONE).unwrap().weight[0];
        assert_eq!(b.weight, vec![w - 1, 1], "{}", b.name);
    }
}

#[test]
fn vertical_of_vector_bundle_is_fibre_product() {
    let e = vector_bundle(2, 1);
    let v = vertical(&e).unwrap();
    let t = &v.transitions[0];
    for i in 1..=2 {
        let y = Var::fibre("y", Lift::NONE, i);
        let dy = Var::fibre("y", L1, i);
        let lifted = t.laws[&dy].rename(|u| if u.lift.bit(0) { u.with_lift(Lift::NONE) } else { u.clone() });
        assert_eq!(lifted, t.laws[&y]);
    }
}

#[test]
fn plin_of_degree_one_is_the_bundle() {
    let e = vector_bundle(2, 2);
    let p = plin(&e).unwrap();
    // the dotted copy at (0, 1) survives, the original at (1, 0) is truncated
    assert_eq!(p.blocks.len(), 2);
    let mut back = p.rename(|v| v.with_lift(Lift::NONE));
    for b in &mut back.blocks {
        b.weight.truncate(0);
        b.weight.push(if b.kind == grlin_core::graded_algebra::VarKind::Base { 0 } else { 1 });
    }
    back.degree = vec![1];
    back.lift_depth = 0;
    assert_eq!(back.compare(&e), Ok(()));
}

#[test]
fn full_lin_of_degree_one_is_identity() {
    let e = vector_bundle(3, 1);
    assert_eq!(full_lin(&e).unwrap().compare(&e), Ok(()));
}

#[test]
fn plin_vector_leg_is_linear() {
    for f in corpus() {
        let p = plin(&f).unwrap();
        let leg: Vec<Var> = p.blocks.iter().filter(|b| b.weight[1] == 1).flat_map(|b| b.vars()).collect();
        for t in &p.transitions {
            for (v, law) in &t.laws {
                if leg.contains(v) {
                    for (m, _) in law.terms() {
                        assert_eq!(m.degree_where(|u| leg.contains(u)), 1, "{}: {v} has {m}", f.name);
                    }
                }
            }
        }
    }
}

#[test]
fn iterated_and_direct_agree_exactly_up_to_degree_three() {
    for f in corpus() {
        let a = full_lin_renamed(&f).unwrap();
        let b = full_lin_direct(&f).unwrap();
        assert_eq!(a.compare(&b), Ok(()), "{}", f.name);
    }
}

#[test]
fn iterated_and_direct_agree_numerically_in_degree_four() {
    let f = f4();
    let a = full_lin_renamed(&f).unwrap();
    let b = full_lin_direct(&f).unwrap();
    let inst = NumericInstance::new(&[&a, &b], 7, 2);
    for pt in sample_points(&a, 7, 20) {
        let ea = inst.apply_transition(&a.transitions[0], &pt).unwrap();
        let eb = inst.apply_transition(&b.transitions[0], &pt).unwrap();
        assert_eq!(ea, eb);
    }
}

#[test]
fn full_lin_of_t3m_is_triple_tangent_locus() {
    let m = higher_tangent(3, 1, Jets::Derivative);
    let a = full_lin_renamed(&m).unwrap();
    let mut t = m.clone();
    for _ in 0..3 {
        t = tangent_lift(&t);
    }
    let mut locus = fixed_locus(&t, &[1, -1, -1, -1]).unwrap();
    for b in &mut locus.blocks {
        b.weight.remove(0);
    }
    locus.degree = vec![1; 3];
    assert_eq!(a.compare(&locus), Ok(()));
}

#[test]
fn iota_is_weight_preserving_embedding() {
    for f in corpus() {
        let i = iota(&f).unwrap();
        let lin = plin(&f).unwrap();
        let opts = CheckOptions { weights: WeightMatch::Total, ..CheckOptions::default() };
        let r = validate_morphism(&i, &f, &lin, &opts);
        assert!(r.passed(), "{}: {:?}", f.name, r.failures().collect::<Vec<_>>());
    }
    let f = f2();
    let i = iota(&f).unwrap();
    let u = &i.maps[0].pullback;
    assert_eq!(u[&Var::fibre("y", L1, 1)], Poly::var(Var::fibre("y", NONE, 1)));
    assert_eq!(u[&Var::fibre("z", L1, 2)], Poly::var(Var::fibre("z", NONE, 2)).scale(&q(2, 1)));
}

#[test]
fn iota_of_degree_one_is_identity_embedding() {
    let e = vector_bundle(2, 1);
    let i = iota(&e).unwrap();
    for (v, p) in &i.maps[0].pullback {
        assert_eq!(p.as_var().map(|u| u.with_lift(Lift::NONE)), Some(v.with_lift(Lift::NONE)));
    }
}

/// `y -> t y`, `z -> t^2 z`: commutes with every transition law.
fn homothety(f: &Presentation, t: i64) -> Morphism {
    let pullback = f
        .vars()
        .into_iter()
        .map(|v| {
            let w = f.weight(&v).unwrap()[0] as u32;
            let img = Poly::var(v.clone()).scale(&Q::from_integer(t.pow(w).into()));
            (v, img)
        })
        .collect();
    Morphism::uniform("h", f, pullback)
}

#[test]
fn plin_morphism_identity_and_composition() {
    let f = f2();
    let id = Morphism::identity(&f);
    assert!(plin_morphism(&id, &f, &f).unwrap().is_identity());
    let (a, b) = (homothety(&f, 2), homothety(&f, -3));
    let ab = Morphism::compose(&a, &b).unwrap();
    let lhs = plin_morphism(&ab, &f, &f).unwrap();
    let rhs = Morphism::compose(&plin_morphism(&a, &f, &f).unwrap(), &plin_morphism(&b, &f, &f).unwrap()).unwrap();
    assert_eq!(lhs.compare(&rhs), Ok(()));
    let lin = plin(&f).unwrap();
    assert!(validate_morphism(&lhs, &lin, &lin, &CheckOptions::default()).passed());
}

#[test]
fn plin_of_injective_morphism_is_injective() {
    // the projection-free inclusion E -> E (+) E', `y -> (y, 0)`, is injective
    let small = graded(&GradedSpec { name: "S", base: 1, blocks: vec![("y", 1, 1), ("z", 2, 1)], opaque_base: false });
    let big = graded(&GradedSpec { name: "B", base: 1, blocks: vec![("y", 1, 1), ("z", 2, 2)], opaque_base: false });
    let local = |p: &Presentation| grlin_core::fixtures::local(p);
    let (s, b) = (local(&small), local(&big));
    let pullback = b
        .vars()
        .into_iter()
        .map(|v| {
            let img = if &*v.name == "z" && v.index == 2 { Poly::zero() } else { Poly::var(v.clone()) };
            (v, img)
        })
        .collect();
    let phi = Morphism::uniform("inc", &s, pullback);
    assert!(validate_morphism(&phi, &s, &b, &CheckOptions::default()).passed());
    let lphi = plin_morphism(&phi, &s, &b).unwrap();
    let (ls, lb) = (plin(&s).unwrap(), plin(&b).unwrap());
    let inst = NumericInstance::new(&[&ls, &lb], 3, 2);
    let tgt: Vec<Var> = lb.fibre_vars();
    let laws: Vec<Poly> = tgt.iter().map(|v| lphi.maps[0].pullback[v].clone()).collect();
    let src = ls.fibre_vars();
    for pt in sample_points(&ls, 3, 5) {
        let jac = inst.jacobian(&laws, &src, &pt).unwrap();
        assert_eq!(grlin_core::graded_algebra::linalg::rank(&jac), src.len());
    }
}

#[test]
fn flips_compose_as_stated() {
    let d = full_lin_direct(&f3()).unwrap();
    assert_eq!(flip(&d, &perm::identity(3)).unwrap().blocks, d.blocks);
    let t = perm::transposition(3, 0, 2);
    assert_eq!(flip(&flip(&d, &t).unwrap(), &t).unwrap().blocks, d.blocks);
    for g1 in perm::all(3) {
        for g2 in perm::all(3) {
            let lhs = flip(&flip(&d, &g1).unwrap(), &g2).unwrap();
            let rhs = flip(&d, &perm::compose(&g1, &g2)).unwrap();
            assert_eq!(lhs.blocks, rhs.blocks);
        }
    }
}

#[test]
fn canonical_sigma_degree_two_formulas() {
    let d = full_lin_direct(&f2()).unwrap();
    let s = canonical_sigma(&d, &[1, 0]).unwrap();
    let pb = &s.maps[0].pullback;
    assert_eq!(pb[&Var::fibre("y", Lift(1), 1)], Poly::var(Var::fibre("y", Lift(2), 1)));
    assert_eq!(pb[&Var::fibre("z", Lift(3), 2)], Poly::var(Var::fibre("z", Lift(3), 2)));
    assert!(canonical_sigma(&d, &[0, 1]).unwrap().is_identity());
}

#[test]
fn canonical_sigmas_intertwine_f3() {
    let d = full_lin_direct(&f3()).unwrap();
    for g in perm::all(3) {
        let s = canonical_sigma(&d, &g).unwrap();
        let r = validate_morphism(&s, &d, &flip(&d, &g).unwrap(), &CheckOptions::default());
        assert!(r.passed(), "{g:?}");
    }
}

/// `p*(x^(a)) = x^(a)`, `p*(dx^(b-1)) = c_b dx^(b)`.
fn prop_b(src: &Presentation, tgt: &Presentation, scale: impl Fn(u32) -> Q) -> Morphism {
    let pullback = tgt
        .vars()
        .into_iter()
        .map(|v| {
            let img = if v.lift.bit(0) {
                let b = v.name.len() as u32;
                Poly::var(Var::fibre(&format!("d{}", v.name), Lift(1), v.index)).scale(&scale(b))
            } else {
                Poly::var(v.clone())
            };
            (v, img)
        })
        .collect();
    Morphism::uniform("p", src, pullback)
}

#[test]
fn plin_of_t2m_is_ttm() {
    for m in [1, 2] {
        // Taylor coordinates: the identification is a pure relabelling
        let src = plin(&higher_tangent(2, m, Jets::Taylor)).unwrap();
        let tgt = tangent_lift(&higher_tangent(1, m, Jets::Taylor));
        let r = validate_morphism(&prop_b(&src, &tgt, |_| q(1, 1)), &src, &tgt, &CheckOptions::default());
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
        // derivative coordinates need the factor 1/b
        let src = plin(&higher_tangent(2, m, Jets::Derivative)).unwrap();
        let tgt = tangent_lift(&higher_tangent(1, m, Jets::Derivative));
        let plain = validate_morphism(&prop_b(&src, &tgt, |_| q(1, 1)), &src, &tgt, &CheckOptions::default());
        assert!(!plain.passed());
        let scaled = validate_morphism(&prop_b(&src, &tgt, |b| q(1, b as i64)), &src, &tgt, &CheckOptions::default());
        assert!(scaled.passed(), "{:?}", scaled.failures().collect::<Vec<_>>());
    }
}

#[test]
fn plin_of_t3m_is_tt2m() {
    let src = plin(&higher_tangent(3, 1, Jets::Taylor)).unwrap();
    let tgt = tangent_lift(&higher_tangent(2, 1, Jets::Taylor));
    let r = validate_morphism(&prop_b(&src, &tgt, |_| q(1, 1)), &src, &tgt, &CheckOptions::default());
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
}
