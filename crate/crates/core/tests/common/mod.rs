//! Hand-written oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use grlin_core::graded_algebra::{q, FnSym, Label, Lift, Monomial, Poly, Var, Q};

/// One coordinate factor of a printed law: block name and lift label.
pub type Factor = (&'static str, Lift);

/// Expands an index-notation law `target' = sum_terms c * f1^{a1} .. fn^{an} T_{an..a1}^{target}`
/// by summing every index over `1..=dims[block]`, independently of the
/// engine's lifting code.
pub fn einstein(target: &Var, dims: &BTreeMap<&str, u32>, terms: &[(Q, &[Factor])]) -> Poly {
    let mut out = Poly::zero();
    for (c, factors) in terms {
        let tuples = factors.iter().fold(vec![Vec::new()], |acc: Vec<Vec<u32>>, (n, _)| {
            acc.iter().flat_map(|t| (1..=dims[n]).map(move |i| [t.as_slice(), &[i]].concat())).collect()
        });
        for idx in tuples {
            let vars: Vec<Var> = factors.iter().zip(&idx).map(|((n, l), i)| Var::fibre(n, *l, *i)).collect();
            let lower: Vec<Label> = factors.iter().zip(&idx).map(|((n, _), i)| Label::new(n, *i)).collect();
            let t = FnSym::sym("T", lower, vec![target.label()]);
            out.add_term(Monomial::from_vars(vars).mul(&Monomial::fnsym(t)), c.clone());
        }
    }
    out
}

pub fn one() -> Q {
    q(1, 1)
}

/// `x' = X(x)` for base coordinate `x_i`.
pub fn base_law(i: u32) -> Poly {
    Poly::fnsym(FnSym::sym("X", vec![], vec![Label::new("x", i)]))
}

pub const NONE: Lift = Lift(0);
pub const L1: Lift = Lift(1);
pub const L2: Lift = Lift(2);
pub const L3: Lift = Lift(3);
