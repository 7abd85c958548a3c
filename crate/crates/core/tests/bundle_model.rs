use std::collections::BTreeMap;

use grlin_core::bundle_model::linear::compose_transitions;
use grlin_core::bundle_model::morphism::{validate_morphism, CheckOptions, Morphism};
use grlin_core::bundle_model::numeric::{sample_points, NumericInstance};
use grlin_core::bundle_model::surgery::{fixed_locus, inclusion, projection, truncate, zero_negative};
use grlin_core::bundle_model::validate::validate;
use grlin_core::bundle_model::{FnDecl, Presentation};
use grlin_core::error::Error;
use grlin_core::fixtures::{cocycle_f2, f2, f3, graded, higher_tangent, local, GradedSpec, Jets};
use grlin_core::functors::{tangent_lift, vertical};
use grlin_core::graded_algebra::*;

fn y(i: u32) -> Var {
    Var::fibre("y", Lift::NONE, i)
}

fn z(i: u32) -> Var {
    Var::fibre("z", Lift::NONE, i)
}

fn block_keys(p: &Presentation) -> Vec<(String, u32)> {
    let mut k: Vec<(String, u32)> = p.blocks.iter().map(|b| (b.name.to_string(), b.lift.0)).collect();
    k.sort();
    k
}

#[test]
fn fixtures_validate() {
    for p in [f2(), f3(), cocycle_f2().unwrap(), higher_tangent(3, 2, Jets::Derivative), higher_tangent(2, 1, Jets::Taylor)] {
        let r = validate(&p);
        assert!(r.passed(), "{}: {:?}", p.name, r.failures().collect::<Vec<_>>());
        assert!(r.warnings.is_empty(), "{}: {:?}", p.name, r.warnings);
    }
}

#[test]
fn inhomogeneous_law_is_rejected() {
    let mut p = f2();
    let law = p.transitions[0].laws.get_mut(&y(1)).unwrap();
    *law = &*law + &Poly::var(Var::base("x", 1));
    let r = validate(&p);
    let c = r.check("homogeneity").unwrap();
    assert!(!c.passed);
    assert!(c.detail.contains("inhomogeneous"), "{}", c.detail);
}

#[test]
fn wrong_weight_law_is_rejected() {
    let mut p = f2();
    p.transitions[0].laws.insert(z(1), Poly::var(y(1)));
    assert!(!validate(&p).check("homogeneity").unwrap().passed);
}

#[test]
fn fibre_dependent_base_law_is_rejected() {
    let mut p = f2();
    let x = Var::base("x", 1);
    let law = p.transitions[0].laws.get_mut(&x).unwrap();
    *law = &*law * &Poly::var(y(1));
    let r = validate(&p);
    assert!(!r.passed());
}

#[test]
fn nonlinear_top_weight_is_rejected() {
    let mut p = f2();
    let law = p.transitions[0].laws.get_mut(&z(1)).unwrap();
    *law = &*law + &(&Poly::var(z(1)) * &Poly::var(y(1)));
    let r = validate(&p);
    assert!(!r.passed());
}

#[test]
fn missing_law_is_reported() {
    let mut p = f2();
    p.transitions[0].laws.remove(&z(2));
    let c = validate(&p).check("coverage").cloned().unwrap();
    assert!(!c.passed);
    assert!(c.detail.contains("no law"), "{}", c.detail);
}

#[test]
fn singular_linear_block_is_rejected() {
    let mut p = f2();
    // z1' = 0 z1 + 0 z2 + ... makes the weight-2 block singular
    let law = p.transitions[0].laws.get_mut(&z(1)).unwrap();
    *law = law.filter_terms(|m| m.degree_where(|u| !u.is_base()) != 1);
    assert!(!validate(&p).passed());
}

#[test]
fn nonsymmetric_symbol_is_symmetrised_with_a_warning() {
    let mut p = f2();
    let raw = |f: &FnSym| if &*f.name != "T" { f.clone() } else { FnSym::new(f.name.clone(), false, f.lower.iter().rev().cloned().collect(), f.upper.clone(), f.deriv.clone()) };
    for t in &mut p.transitions {
        for l in t.laws.values_mut() {
            *l = l.map_fns(raw);
        }
    }
    p.fns.retain(|d| &*d.name != "T");
    p.fns.push(FnDecl { inverse: Some(name("Ti")), ..FnDecl::nonsymmetric("T") });
    let r = validate(&p);
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    assert_eq!(r.warnings.len(), 1);
    assert!(r.warnings[0].contains("symmetrised"), "{}", r.warnings[0]);
    let (sym, _) = p.symmetrised();
    assert_eq!(sym.transitions[0].laws, f2().transitions[0].laws);
}

#[test]
fn truncate_f3_to_f2() {
    let t = truncate(&f3(), &[1], 2).unwrap();
    assert_eq!(block_keys(&t), block_keys(&f2()));
    assert_eq!(t.degree, vec![2]);
    for v in f2().vars() {
        assert_eq!(t.transitions[0].laws[&v], f2().transitions[0].laws[&v], "{v}");
    }
    assert!(validate(&t).passed());
}

#[test]
fn truncate_extremes_and_idempotence() {
    let f = f3();
    assert_eq!(truncate(&f, &[1], 3).unwrap().compare(&f), Ok(()));
    let base = truncate(&f, &[1], 0).unwrap();
    assert_eq!(block_keys(&base), vec![("x".into(), 0)]);
    for l in 0..=3 {
        let once = truncate(&f, &[1], l).unwrap();
        assert_eq!(truncate(&once, &[1], l).unwrap(), once);
        for m in 0..=l {
            assert_eq!(truncate(&once, &[1], m).unwrap(), truncate(&f, &[1], m).unwrap());
        }
    }
}

#[test]
fn truncate_rejects_leaks_and_bad_arity() {
    let mut p = f2();
    // y1 law now mentions z1: quotienting out z cannot be well defined
    let law = p.transitions[0].laws.get_mut(&y(1)).unwrap();
    *law = &*law + &Poly::var(z(1));
    assert!(matches!(truncate(&p, &[1], 1), Err(Error::TruncationLeak { .. })));
    assert!(matches!(truncate(&f2(), &[1, 0], 1), Err(Error::Invalid(_))));
}

#[test]
fn zero_negative_on_tangent_lift_is_vertical() {
    let tf = tangent_lift(&f2());
    let zn = zero_negative(&tf, &[1, -1]).unwrap();
    let v = vertical(&f2()).unwrap();
    assert_eq!(block_keys(&zn), block_keys(&v));
    assert_eq!(zn.transitions[0].laws, v.transitions[0].laws);
    // the lifted base coordinate is the one removed
    assert!(tf.has_var(&Var::fibre("x", Lift(1), 1)));
    assert!(!zn.has_var(&Var::fibre("x", Lift(1), 1)));
}

#[test]
fn zero_negative_with_nonnegative_weights_is_identity() {
    let tf = tangent_lift(&f2());
    for x in [[0, 0], [1, 0], [0, 1], [2, 3]] {
        assert_eq!(zero_negative(&tf, &x).unwrap(), tf);
    }
}

#[test]
fn fixed_locus_is_the_weight_zero_part() {
    let tf = tangent_lift(&f2());
    let fl = fixed_locus(&tf, &[1, -1]).unwrap();
    let want: Vec<(String, u32)> = tf
        .blocks
        .iter()
        .filter(|b| b.weight[0] as i64 - b.weight[1] as i64 == 0)
        .map(|b| (b.name.to_string(), b.lift.0))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    assert_eq!(block_keys(&fl), want);
    assert!(validate(&fl).passed());
}

#[test]
fn zero_negative_rejects_inconsistent_restriction() {
    let mut p = tangent_lift(&f2());
    // the lifted base law picks up a term surviving on the zero locus
    let dx = Var::fibre("x", Lift(1), 1);
    let law = p.transitions[0].laws.get_mut(&dx).unwrap();
    *law = &*law + &Poly::var(Var::fibre("y", Lift(1), 1));
    assert!(matches!(zero_negative(&p, &[1, -1]), Err(Error::InconsistentRestriction { .. })));
}

#[test]
fn projection_and_inclusion_are_morphisms() {
    let f = f3();
    let t = truncate(&f, &[1], 2).unwrap();
    let opts = CheckOptions::default();
    let r = validate_morphism(&projection(&f, &t), &f, &t, &opts);
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    let tf = tangent_lift(&f2());
    let v = zero_negative(&tf, &[1, -1]).unwrap();
    let r = validate_morphism(&inclusion(&v, &tf), &v, &tf, &opts);
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
}

#[test]
fn cocycle_closes_to_identity() {
    let p = cocycle_f2().unwrap();
    assert!(validate(&p).passed());
    let uv = p.transition("U", "V").unwrap();
    let vw = p.transition("V", "W").unwrap();
    let wu = p.transition("W", "U").unwrap();
    let inst = NumericInstance::new(&[&p], 5, 2);
    for pt in sample_points(&p, 5, 20) {
        let a = inst.apply_transition(uv, &pt).unwrap();
        let b = inst.apply_transition(vw, &a).unwrap();
        let c = inst.apply_transition(wu, &b).unwrap();
        assert_eq!(c, pt);
    }
    // symbolically the cycle is the identity only modulo T Ti = 1, so the
    // check stays numeric
    let cycle = compose_transitions(&compose_transitions(uv, vw).unwrap(), wu).unwrap();
    assert_eq!(cycle.from, cycle.to);
}

#[test]
fn numeric_instance_is_deterministic() {
    let p = f3();
    let x = Var::base("x", 1);
    let f = FnSym::sym("T", vec![Label::new("y", 1), Label::new("y", 2)], vec![Label::new("z", 1)]);
    let pts = sample_points(&p, 9, 5);
    assert_eq!(pts, sample_points(&p, 9, 5));
    assert_ne!(pts, sample_points(&p, 10, 5));
    let a = NumericInstance::new(&[&p], 3, 2);
    let b = NumericInstance::new(&[&p], 3, 2);
    // query order does not matter
    let _ = b.eval_fn(&FnSym::sym("X", vec![], vec![Label::new("x", 1)]), &pts[0]).unwrap();
    for pt in &pts {
        assert_eq!(a.eval_fn(&f, pt).unwrap(), b.eval_fn(&f, pt).unwrap());
    }
    // repeated queries hit the same cached entry
    let mut pt = pts[0].clone();
    pt.insert(x, q(1, 1));
    let vals: Vec<Q> = (0..3).map(|_| a.eval_fn(&f, &pt).unwrap()).collect();
    assert!(vals.iter().all(|v| *v == vals[0]));
}

#[test]
fn declared_inverses_are_inverse() {
    let p = f2();
    let inst = NumericInstance::new(&[&p], 17, 2);
    let pt = &sample_points(&p, 17, 1)[0];
    let entry = |n: &str, i: u32, j: u32| inst.eval_fn(&FnSym::sym(n, vec![Label::new("z", i)], vec![Label::new("z", j)]), pt).unwrap();
    for i in 1..=2 {
        for j in 1..=2 {
            let s: Q = (1..=2).map(|k| entry("T", i, k) * entry("Ti", k, j)).sum();
            assert_eq!(s, q((i == j) as i64, 1));
        }
    }
    // base maps compose to the identity
    let x = Var::base("x", 1);
    let fwd = Poly::fnsym(FnSym::sym("X", vec![], vec![Label::new("x", 1)]));
    let image = inst.eval(&fwd, pt).unwrap();
    let mut moved = pt.clone();
    moved.insert(x.clone(), image);
    let back = inst.eval(&Poly::fnsym(FnSym::sym("Xi", vec![], vec![Label::new("x", 1)])), &moved).unwrap();
    assert_eq!(back, pt[&x]);
}

#[test]
fn derivatives_match_central_differences() {
    // a cap-2 instance is quadratic in the base, so central differences are exact
    let p = graded(&GradedSpec { base: 2, ..GradedSpec::uniform("F2", 2, 1, 2) });
    let inst = NumericInstance::new(&[&p], 23, 2);
    let syms = [
        FnSym::sym("T", vec![Label::new("y", 1), Label::new("y", 1)], vec![Label::new("z", 1)]),
        FnSym::sym("X", vec![], vec![Label::new("x", 1)]),
        FnSym::sym("X", vec![], vec![Label::new("x", 2)]),
    ];
    let h = q(1, 3);
    for pt in sample_points(&p, 23, 20) {
        for f in &syms {
            for i in 1..=2 {
                let xi = Var::base("x", i);
                let at = |s: Q| {
                    let mut p2 = pt.clone();
                    p2.insert(xi.clone(), &pt[&xi] + s);
                    inst.eval_fn(f, &p2).unwrap()
                };
                let diff = (at(h.clone()) - at(-h.clone())) / (q(2, 1) * &h);
                let d = inst.eval_fn(&f.differentiated(Label::new("x", i)), &pt).unwrap();
                assert_eq!(diff, d, "{f} along x{i}");
            }
        }
    }
}

#[test]
fn morphism_validation() {
    let f = f3();
    let opts = CheckOptions::default();
    assert!(validate_morphism(&Morphism::identity(&f), &f, &f, &opts).passed());
    // homothety y -> 2y, z -> 4z, w -> 8w commutes with weight-homogeneous laws
    let scale = |p: &Presentation, c: i64| {
        let pull: BTreeMap<Var, Poly> = p
            .vars()
            .into_iter()
            .map(|v| {
                let w = p.weight(&v).unwrap()[0];
                (v.clone(), Poly::var(v).scale(&q(c.pow(w), 1)))
            })
            .collect();
        Morphism::uniform("h", p, pull)
    };
    assert!(validate_morphism(&scale(&f, 2), &f, &f, &opts).passed());
    // a weight-breaking pullback fails homogeneity
    let mut bad = Morphism::identity(&f);
    for m in &mut bad.maps {
        m.pullback.insert(z(1), Poly::var(y(1)));
    }
    assert!(!validate_morphism(&bad, &f, &f, &opts).check("homogeneity").unwrap().passed);
    // a weight-preserving map that ignores the transition fails intertwining
    let mut skew = Morphism::identity(&f);
    for m in &mut skew.maps {
        m.pullback.insert(y(1), Poly::var(y(2)));
        m.pullback.insert(y(2), Poly::var(y(1)));
    }
    assert!(!validate_morphism(&skew, &f, &f, &opts).check("intertwining").unwrap().passed);
    // but on the local bundle every weight-preserving map is a morphism
    let l = local(&f);
    let mut local_skew = Morphism::identity(&l);
    for m in &mut local_skew.maps {
        m.pullback.insert(y(1), Poly::var(y(2)));
        m.pullback.insert(y(2), Poly::var(y(1)));
    }
    assert!(validate_morphism(&local_skew, &l, &l, &opts).passed());
    // missing components are a shape error
    let mut partial = Morphism::identity(&f);
    partial.maps[0].pullback.remove(&z(2));
    assert!(!validate_morphism(&partial, &f, &f, &opts).check("shape").unwrap().passed);
}

#[test]
fn composition_of_morphisms() {
    let f = f2();
    let swap = |p: &Presentation| {
        let pull: BTreeMap<Var, Poly> = p.vars().into_iter().map(|v| (v.clone(), Poly::var(v))).collect();
        let mut m = Morphism::uniform("s", p, pull);
        for c in &mut m.maps {
            c.pullback.insert(z(1), &Poly::var(z(1)) + &(&Poly::var(y(1)) * &Poly::var(y(2))));
        }
        m
    };
    let l = local(&f);
    let s = swap(&l);
    let twice = Morphism::compose(&s, &s).unwrap();
    let want = &Poly::var(z(1)) + &(&Poly::var(y(1)) * &Poly::var(y(2))).scale(&q(2, 1));
    assert_eq!(twice.maps[0].pullback[&z(1)], want);
    let id = Morphism::identity(&l);
    assert_eq!(Morphism::compose(&id, &s).unwrap().compare(&s), Ok(()));
    assert_eq!(Morphism::compose(&s, &id).unwrap().compare(&s), Ok(()));
}
