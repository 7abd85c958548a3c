use std::collections::BTreeMap;

use grlin_core::bundle_model::morphism::{CheckOptions, ChartMap, Morphism};
use grlin_core::bundle_model::numeric::{sample_points, NumericInstance};
use grlin_core::bundle_model::Presentation;
use grlin_core::degree2::*;
use grlin_core::fixtures::{f2, local};
use grlin_core::graded_algebra::linalg;
use grlin_core::graded_algebra::*;
use grlin_core::symmetric::*;

fn pv(v: &Var) -> Poly {
    Poly::var(v.clone())
}

fn failures(r: &grlin_core::report::Report) -> Vec<String> {
    r.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect()
}

fn canonical() -> SymmetricVB {
    SymmetricVB::linearised(&f2()).unwrap()
}

fn conjugated() -> SymmetricVB {
    let s = canonical();
    s.conjugate(&random_unipotent(&s.d, 29)).unwrap()
}

/// `C_ab` for the local bundle with `sigma^* z = z + y10^a y01^b C_ab`.
fn c(a: usize, b: usize) -> Q {
    q([[0, 2], [-2, 0]][a][b], 1)
}

/// Local `Lin(F2)` whose flip has the antisymmetric quadratic term `C`.
fn twisted() -> SymmetricVB {
    let mut s = SymmetricVB::linearised(&local(&f2())).unwrap();
    let dc = double_coordinates(&s.d);
    for m in &mut s.generators[0].maps {
        let mut law = pv(&dc.core[0]);
        for a in 0..2 {
            for b in 0..2 {
                law = &law + &(&pv(&dc.side10[a]) * &pv(&dc.side01[b])).scale(&c(a, b));
            }
        }
        m.pullback.insert(dc.core[0].clone(), law);
    }
    s
}

fn all() -> Vec<SymmetricVB> {
    vec![canonical(), conjugated(), twisted()]
}

#[test]
fn fixtures_are_symmetric() {
    for s in all() {
        let r = validate_symmetric(&s);
        assert!(r.passed(), "{}: {:?}", s.d.name, failures(&r));
    }
}

#[test]
fn duals_transform_by_inverse_transpose() {
    for s in [canonical(), conjugated()] {
        for leg in [Leg::A, Leg::B] {
            let dual = dual_dvb(&s.d, leg).unwrap();
            let (duals, fibre): (Vec<Var>, Vec<Var>) = dual.pairs.iter().cloned().unzip();
            let inst = NumericInstance::new(&[&s.d, &dual.presentation], 3, 2);
            for (t, dt) in s.d.transitions.iter().zip(&dual.presentation.transitions) {
                let laws: Vec<Poly> = fibre.iter().map(|v| t.laws[v].clone()).collect();
                let dlaws: Vec<Poly> = duals.iter().map(|v| dt.laws[v].clone()).collect();
                for pt in sample_points(&s.d, 3, 20) {
                    let l = inst.jacobian(&laws, &fibre, &pt).unwrap();
                    let n = inst.jacobian(&dlaws, &duals, &pt).unwrap();
                    let id: linalg::Matrix = (0..l.len()).map(|i| (0..l.len()).map(|j| q((i == j) as i64, 1)).collect()).collect();
                    let nt: linalg::Matrix = (0..n.len()).map(|i| n.iter().map(|row| row[i].clone()).collect()).collect();
                    assert_eq!(linalg::mul(&nt, &l), id, "{:?} over {}", leg, t.label());
                }
            }
        }
    }
}

#[test]
fn pairing_is_well_defined() {
    for s in [canonical(), conjugated()] {
        let a = dual_dvb(&s.d, Leg::A).unwrap();
        let b = dual_dvb(&s.d, Leg::B).unwrap();
        let r = pairing_report(&s.d, &a, &b, 8, 20);
        assert!(r.passed(), "{}: {:?}", s.d.name, failures(&r));
        assert!(r.check("pairing.core-shift").unwrap().passed);
        // the pairing wants one dual over each leg
        let (phi, psi, d) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
        assert!(pairing(&b, &a, &psi, &phi, &d).is_err());
    }
}

#[test]
fn skew_form_is_skew() {
    for s in all() {
        for chart in s.d.charts.clone() {
            let f = skew_form(&s, &chart, 4, 20).unwrap();
            assert!(f.report.passed(), "{} on {chart}: {:?}", s.d.name, failures(&f.report));
            for r in 0..f.first.len() {
                for t in 0..f.second.len() {
                    assert_eq!(f.matrix[r][t], -f.matrix[t][r].clone(), "{r} {t}");
                }
            }
        }
    }
}

#[test]
fn skew_form_closed_forms() {
    // canonical flip: <Psi1, Psi2> = Q1.b2 - Q2.b1
    let s = canonical();
    let f = skew_form(&s, "U", 0, 1).unwrap();
    let n = f.first.len() / 2;
    let (b1, q1) = f.first.split_at(n);
    let (b2, q2) = f.second.split_at(n);
    let dot = |x: &[Var], y: &[Var]| -> Poly { x.iter().zip(y).map(|(u, v)| &pv(u) * &pv(v)).sum() };
    assert_eq!(f.omega, &dot(q1, b2) - &dot(q2, b1));
    // with C, the core part adds alpha C_ab b2^a b1^b
    let t = twisted();
    let g = skew_form(&t, "U", 0, 1).unwrap();
    let mut want = &dot(q1, b2) - &dot(q2, b1);
    for a in 0..2 {
        for b in 0..2 {
            want = &want + &(&(&pv(&g.alpha[0]) * &pv(&b2[a])) * &pv(&b1[b])).scale(&c(a, b));
        }
    }
    assert_eq!(g.omega, want);
}

#[test]
fn algebroid_of_the_twisted_flip() {
    let t = twisted();
    let alg = algebroid(&t, "U", 5, 20).unwrap();
    assert!(alg.report.passed(), "{:?}", failures(&alg.report));
    for a in 0..2 {
        for b in 0..2 {
            // sigma_ab = C_ba
            assert_eq!(alg.sigma(a, b, 0), Poly::constant(c(b, a)));
            let br = alg.bracket(&alg.e(a), &alg.e(b));
            assert_eq!(br.f[0], Poly::constant(c(b, a)));
            assert!(br.e.iter().all(|p| p.is_zero()));
        }
    }
    assert!(alg.report.check("jacobi").unwrap().passed);
}

#[test]
fn algebroids_satisfy_jacobi() {
    for s in [canonical(), conjugated()] {
        for chart in s.d.charts.clone() {
            let alg = algebroid(&s, &chart, 6, 20).unwrap();
            assert!(alg.report.passed(), "{} on {chart}: {:?}", s.d.name, failures(&alg.report));
        }
    }
}

#[test]
fn poisson_tensor_is_linear_and_closed() {
    for s in all() {
        let alg = algebroid(&s, "U", 7, 20).unwrap();
        let p = poisson(&s, &alg).unwrap();
        assert!(p.report.passed(), "{}: {:?}", s.d.name, failures(&p.report));
        for name in ["schouten", "weight1", "weight2", "closed-form"] {
            assert!(p.report.check(name).unwrap().passed, "{name}");
        }
        // every entry is constant or linear in the dual coordinates
        for (_, e) in p.lambda.entries() {
            assert!(e.terms().all(|(m, _)| m.degree_where(|v| !v.is_base()) <= 1));
        }
    }
}

fn diagonal_homothety(p: &Presentation, c: i64) -> Morphism {
    let pull: BTreeMap<Var, Poly> = p
        .vars()
        .into_iter()
        .map(|v| {
            let w: u32 = p.weight(&v).unwrap().iter().sum();
            (v.clone(), pv(&v).scale(&q(c.pow(w), 1)))
        })
        .collect();
    Morphism::uniform("h", p, pull)
}

/// `z -> 3 z + Q_12 y10^1 y01^2 + Q_21 y10^2 y01^1`.
fn quadratic_map(s: &SymmetricVB, q12: i64, q21: i64) -> Morphism {
    let dc = double_coordinates(&s.d);
    let mut pull: BTreeMap<Var, Poly> = s.d.vars().into_iter().map(|v| (v.clone(), pv(&v))).collect();
    let z = &dc.core[0];
    let quad = &(&pv(&dc.side10[0]) * &pv(&dc.side01[1])).scale(&q(q12, 1)) + &(&pv(&dc.side10[1]) * &pv(&dc.side01[0])).scale(&q(q21, 1));
    pull.insert(z.clone(), &pv(z).scale(&q(3, 1)) + &quad);
    Morphism { name: "phi".into(), maps: s.d.charts.iter().map(|c| ChartMap { source: c.clone(), target: c.clone(), pullback: pull.clone() }).collect() }
}

#[test]
fn symmetric_morphisms_have_isotropic_graphs() {
    let opts = CheckOptions { seed: 12, ..CheckOptions::default() };
    let s = canonical();
    let r = isotropy_report(&Morphism::identity(&s.d), &s, &s, &opts).unwrap();
    assert!(r.passed(), "{:?}", failures(&r));
    let r = isotropy_report(&diagonal_homothety(&s.d, 2), &s, &s, &opts).unwrap();
    assert!(r.passed(), "{:?}", failures(&r));
    let loc = SymmetricVB::linearised(&local(&f2())).unwrap();
    let sym = quadratic_map(&loc, 1, 1);
    assert!(check_morphism_symmetry(&sym, &loc, &loc).unwrap().report.passed());
    let r = isotropy_report(&sym, &loc, &loc, &opts).unwrap();
    assert!(r.passed(), "{:?}", failures(&r));
}

#[test]
fn asymmetric_morphism_graph_is_not_isotropic() {
    let opts = CheckOptions { seed: 12, ..CheckOptions::default() };
    let loc = SymmetricVB::linearised(&local(&f2())).unwrap();
    let bad = quadratic_map(&loc, 2, 0);
    let r = isotropy_report(&bad, &loc, &loc, &opts).unwrap();
    assert!(!r.check("isotropy").unwrap().passed);
    let fixed = symmetrise_morphism(&bad, &loc, &loc).unwrap();
    assert!(isotropy_report(&fixed, &loc, &loc, &opts).unwrap().passed());
}
