//! Sub-bundles cut out by weight conditions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::morphism::Morphism;
use super::presentation::{Block, Presentation};
use crate::error::{Error, Result};
use crate::graded_algebra::{combine, Lift, Name, Poly, Var};

fn keys(blocks: impl Iterator<Item = Block>) -> BTreeSet<(Name, Lift)> {
    blocks.map(|b| b.key()).collect()
}

/// Quotient by the coordinates whose `a`-weight exceeds `l` (`a_s >= 0`).
/// Retained laws must not mention removed coordinates.
pub fn truncate(f: &Presentation, a: &[u32], l: u32) -> Result<Presentation> {
    if a.len() != f.n_weights() {
        return Err(Error::Invalid(format!("weight combination has {} entries, expected {}", a.len(), f.n_weights())));
    }
    let ai: Vec<i64> = a.iter().map(|x| *x as i64).collect();
    let removed = keys(f.blocks.iter().filter(|b| combine(&ai, &b.weight) > l as i64).cloned());
    for t in &f.transitions {
        for (v, p) in &t.laws {
            if removed.contains(&(v.name.clone(), v.lift)) {
                continue;
            }
            if let Some(u) = p.vars().into_iter().find(|u| removed.contains(&(u.name.clone(), u.lift))) {
                return Err(Error::TruncationLeak { var: v.to_string(), chart: t.label(), removed: u.to_string() });
            }
        }
    }
    let mut out = f.clone();
    out.retain_blocks(|b| !removed.contains(&b.key()));
    for (s, &c) in a.iter().enumerate() {
        if c > 0 {
            out.degree[s] = out.degree[s].min(l / c);
        }
    }
    Ok(out)
}

/// Sub-bundle on which every coordinate of negative `x`-weight vanishes.
/// The law of each removed coordinate must itself vanish there.
pub fn zero_negative(f: &Presentation, x: &[i64]) -> Result<Presentation> {
    if x.len() != f.n_weights() {
        return Err(Error::Invalid(format!("weight combination has {} entries, expected {}", x.len(), f.n_weights())));
    }
    let removed = keys(f.blocks.iter().filter(|b| combine(x, &b.weight) < 0).cloned());
    let gone = |v: &Var| removed.contains(&(v.name.clone(), v.lift));
    let mut out = f.clone();
    for t in &mut out.transitions {
        let mut laws = BTreeMap::new();
        for (v, p) in &t.laws {
            let r = p.restrict_zero(gone);
            if gone(v) {
                if !r.is_zero() {
                    return Err(Error::InconsistentRestriction { var: v.to_string(), chart: t.label() });
                }
            } else {
                laws.insert(v.clone(), r);
            }
        }
        t.laws = laws;
    }
    out.blocks.retain(|b| !removed.contains(&b.key()));
    Ok(out)
}

/// Coordinates of `x`-weight zero: `zero_negative(zero_negative(f, x), -x)`.
pub fn fixed_locus(f: &Presentation, x: &[i64]) -> Result<Presentation> {
    let neg: Vec<i64> = x.iter().map(|a| -a).collect();
    zero_negative(&zero_negative(f, x)?, &neg)
}

/// Projection `f -> sub` onto a quotient with a subset of the coordinates.
pub fn projection(f: &Presentation, sub: &Presentation) -> Morphism {
    let pullback: BTreeMap<Var, Poly> = sub.vars().into_iter().map(|v| (v.clone(), Poly::var(v))).collect();
    let mut m = Morphism::uniform(&format!("proj_{}", sub.name), f, pullback);
    m.maps.retain(|c| sub.charts.contains(&c.target));
    m
}

/// Inclusion `sub -> f` of a sub-bundle obtained by zeroing coordinates.
pub fn inclusion(sub: &Presentation, f: &Presentation) -> Morphism {
    let pullback: BTreeMap<Var, Poly> = f
        .vars()
        .into_iter()
        .map(|v| {
            let img = if sub.has_var(&v) { Poly::var(v.clone()) } else { Poly::zero() };
            (v, img)
        })
        .collect();
    Morphism::uniform(&format!("incl_{}", sub.name), sub, pullback)
}
