//! Linear blocks of transition laws and their symbolic inverses.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::presentation::{FnDecl, Presentation, Transition};
use crate::error::{Error, Result};
use crate::graded_algebra::linalg;
use crate::graded_algebra::{FnSym, MultiWeight, Name, Poly, Var, Q};

/// Part of `p` that is linear in `f` with coefficients depending on the base
/// point only, divided by `f`.
pub fn linear_coefficient(p: &Poly, f: &Var) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        if m.exponent(f) == 1 && m.vars.iter().all(|(v, _)| v == f || v.is_base()) {
            if let Some((rest, _)) = m.divide_var(f) {
                out.add_term(rest, c.clone());
            }
        }
    }
    out
}

/// `M[f][u]`: coefficient of source coordinate `f` in the law of target `u`.
pub fn linear_block(laws: &BTreeMap<Var, Poly>, sources: &[Var], targets: &[Var]) -> Vec<Vec<Poly>> {
    sources
        .iter()
        .map(|f| targets.iter().map(|u| laws.get(u).map(|p| linear_coefficient(p, f)).unwrap_or_default()).collect())
        .collect()
}

/// Jacobian block `d x'^u / d x^f` of base laws.
pub fn base_jacobian(laws: &BTreeMap<Var, Poly>, base: &[Var]) -> Vec<Vec<Poly>> {
    base.iter()
        .map(|f| base.iter().map(|u| laws.get(u).map(|p| p.formal_partial(f)).unwrap_or_default()).collect())
        .collect()
}

pub fn constant_matrix(m: &[Vec<Poly>]) -> Option<linalg::Matrix> {
    m.iter().map(|row| row.iter().map(|p| p.as_constant()).collect()).collect()
}

fn single_symbol(p: &Poly) -> Option<FnSym> {
    let mut it = p.terms();
    let (m, c) = it.next()?;
    if it.next().is_some() || !c.is_one() || !m.vars.is_empty() || m.fns.len() != 1 || m.fns[0].1 != 1 {
        return None;
    }
    Some(m.fns[0].0.clone())
}

pub fn inverse_name(decls: &[FnDecl], n: &Name) -> Option<Name> {
    decls
        .iter()
        .find(|d| &d.name == n)
        .and_then(|d| d.inverse.clone())
        .or_else(|| decls.iter().find(|d| d.inverse.as_ref() == Some(n)).map(|d| d.name.clone()))
}

/// `N[u][f]` with `sum_u M[f][u] N[u][g] = delta_fg`, either exactly for a
/// constant block or through declared inverse symbols for a block made of a
/// single symbol family arranged as a block permutation.
pub fn invert_block(m: &[Vec<Poly>], sources: &[Var], targets: &[Var], decls: &[FnDecl]) -> Result<Vec<Vec<Poly>>> {
    if sources.len() != targets.len() {
        return Err(Error::NoInverse(format!("block is {}x{}", sources.len(), targets.len())));
    }
    if let Some(c) = constant_matrix(m) {
        let inv = linalg::inverse(&c).ok_or_else(|| Error::NoInverse("singular constant block".into()))?;
        return Ok(inv.into_iter().map(|r| r.into_iter().map(Poly::constant).collect()).collect());
    }
    let mut pairing: BTreeMap<Name, Name> = BTreeMap::new();
    let mut family: Option<FnSym> = None;
    for (i, f) in sources.iter().enumerate() {
        for (j, u) in targets.iter().enumerate() {
            let p = &m[i][j];
            if p.is_zero() {
                continue;
            }
            let s = single_symbol(p).ok_or_else(|| Error::NoInverse(format!("entry ({f}, {u}) = {p} is not a single symbol")))?;
            if s.lower.len() != 1 || s.upper.len() != 1 || !s.deriv.is_empty() || s.lower[0] != f.label() || s.upper[0] != u.label() {
                return Err(Error::NoInverse(format!("entry ({f}, {u}) = {p} does not match its slots")));
            }
            if let Some(fam) = &family {
                if fam.name != s.name {
                    return Err(Error::NoInverse("mixed symbol families".into()));
                }
            } else {
                family = Some(s.clone());
            }
            match pairing.get(&f.name) {
                Some(n) if *n != u.name => return Err(Error::NoInverse("not a block permutation".into())),
                _ => {
                    pairing.insert(f.name.clone(), u.name.clone());
                }
            }
        }
    }
    let family = family.ok_or_else(|| Error::NoInverse("zero block".into()))?;
    let inv = inverse_name(decls, &family.name).ok_or_else(|| Error::NoInverse(format!("{} has no declared inverse", family.name)))?;
    // every entry of a paired sub-block must be present
    for (i, f) in sources.iter().enumerate() {
        for (j, u) in targets.iter().enumerate() {
            if pairing.get(&f.name) == Some(&u.name) && m[i][j].is_zero() {
                return Err(Error::NoInverse(format!("entry ({f}, {u}) missing from a paired block")));
            }
        }
    }
    let symmetric = decls.iter().find(|d| d.name == inv).map_or(true, |d| d.symmetric);
    Ok(targets
        .iter()
        .map(|u| {
            sources
                .iter()
                .map(|f| {
                    if pairing.get(&f.name) == Some(&u.name) {
                        Poly::fnsym(FnSym::new(inv.clone(), symmetric, alloc::vec![u.label()], alloc::vec![f.label()], Vec::new()))
                    } else {
                        Poly::zero()
                    }
                })
                .collect()
        })
        .collect())
}

/// Fibre coordinates grouped by weight vector, lightest first.
pub fn weight_classes(p: &Presentation) -> Vec<(MultiWeight, Vec<Var>)> {
    let mut classes: BTreeMap<MultiWeight, Vec<Var>> = BTreeMap::new();
    for b in p.blocks.iter().filter(|b| b.kind == crate::graded_algebra::VarKind::Fibre) {
        classes.entry(b.weight.clone()).or_default().extend(b.vars());
    }
    let mut out: Vec<_> = classes.into_iter().collect();
    out.sort_by_key(|(w, _)| (w.iter().sum::<u32>(), w.clone()));
    out
}

/// Inverse coordinate change `to -> from`, for a transition whose base law is
/// the identity. Solved weight class by weight class using declared inverses.
pub fn invert_transition(p: &Presentation, t: &Transition) -> Result<Transition> {
    let mut inv: BTreeMap<Var, Poly> = BTreeMap::new();
    for x in p.base_vars() {
        if t.laws.get(&x).and_then(|l| l.as_var()) != Some(&x) {
            return Err(Error::Unsupported(format!("inverse of {} needs an identity base law", t.label())));
        }
        inv.insert(x.clone(), Poly::var(x));
    }
    for (_, vars) in weight_classes(p) {
        let block = linear_block(&t.laws, &vars, &vars);
        let n = invert_block(&block, &vars, &vars, &p.fns)?;
        let mut rests = Vec::new();
        for u in &vars {
            let law = t.laws.get(u).ok_or_else(|| Error::Unknown(u.to_string()))?;
            let linear: Poly = vars.iter().map(|f| Poly::var(f.clone()) * linear_coefficient(law, f)).sum();
            let rest = (law - &linear).substitute(&inv)?;
            rests.push(&Poly::var(u.clone()) - &rest);
        }
        for (fi, f) in vars.iter().enumerate() {
            let mut s = Poly::zero();
            for (ui, r) in rests.iter().enumerate() {
                s = &s + &(r * &n[ui][fi]);
            }
            inv.insert(f.clone(), s);
        }
    }
    Ok(Transition { from: t.to.clone(), to: t.from.clone(), laws: inv })
}

/// Composite coordinate change `first` then `second`.
pub fn compose_transitions(first: &Transition, second: &Transition) -> Result<Transition> {
    if first.to != second.from {
        return Err(Error::Invalid(format!("cannot compose {} with {}", first.label(), second.label())));
    }
    let laws = second.laws.iter().map(|(v, p)| Ok((v.clone(), p.substitute(&first.laws)?))).collect::<Result<_>>()?;
    Ok(Transition { from: first.from.clone(), to: second.to.clone(), laws })
}

pub fn identity_matrix(n: usize) -> Vec<Vec<Q>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}
