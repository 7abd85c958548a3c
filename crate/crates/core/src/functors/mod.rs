//! Tangent lift, vertical bundle, partial and full linearisation, and the
//! canonical flips of a linearised bundle.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::bundle_model::morphism::{ChartMap, Morphism};
use crate::bundle_model::surgery::{fixed_locus, truncate, zero_negative};
use crate::bundle_model::{Block, Presentation};
use crate::error::{Error, Result};
use crate::graded_algebra::perm::{self, Perm};
use crate::graded_algebra::{qi, Lift, Poly, Var, VarKind};

/// Derivative of `law` along lifted coordinates: `sum_c (d law / d c) c~`.
/// Coefficient functions depend on every coordinate in `base`.
pub fn lift_law(law: &Poly, p: usize, base: &[Var]) -> Poly {
    let mut out = Poly::zero();
    let mut coords = law.vars();
    if law.has_fns() {
        coords.extend(base.iter().cloned());
    }
    for c in coords {
        let d = law.formal_partial(&c);
        if !d.is_zero() {
            out = &out + &(&d * &Poly::var(c.lifted(p)));
        }
    }
    out
}

/// Tangent bundle with one extra weight field: originals get weight
/// `(w, 0)`, lifted coordinates `(w, 1)`.
pub fn tangent_lift(f: &Presentation) -> Presentation {
    let p = f.lift_depth;
    let mut blocks: Vec<Block> = f
        .blocks
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.weight.push(0);
            b
        })
        .collect();
    for b in &f.blocks {
        let mut weight = b.weight.clone();
        weight.push(1);
        blocks.push(Block { name: b.name.clone(), lift: b.lift.with(p), size: b.size, weight, kind: VarKind::Fibre });
    }
    let base = f.base_vars();
    let transitions = f
        .transitions
        .iter()
        .map(|t| {
            let mut t = t.clone();
            let lifted: Vec<(Var, Poly)> = t.laws.iter().map(|(v, l)| (v.lifted(p), lift_law(l, p, &base))).collect();
            t.laws.extend(lifted);
            t
        })
        .collect();
    let mut degree = f.degree.clone();
    degree.push(1);
    Presentation { name: format!("T_{}", f.name), degree, lift_depth: p + 1, blocks, transitions, ..f.clone() }
}

/// Vertical bundle with respect to the first weight field: lifted
/// coordinates of weight `(w, 1)` are relabelled `(w - 1, 1)`; those that
/// would become negative are removed.
pub fn vertical(f: &Presentation) -> Result<Presentation> {
    let n = f.n_weights();
    if n == 0 {
        return Err(Error::Invalid("no weight field".into()));
    }
    let lifted = tangent_lift(f);
    let mut x = alloc::vec![0i64; n + 1];
    x[0] = 1;
    x[n] = -1;
    let mut v = zero_negative(&lifted, &x)?;
    for b in &mut v.blocks {
        b.weight[0] -= b.weight[n];
    }
    v.name = format!("V_{}", f.name);
    Ok(v)
}

/// `pLin(F)`: the vertical bundle truncated to first weight at most `k - 1`.
pub fn plin(f: &Presentation) -> Result<Presentation> {
    let k = *f.degree.first().ok_or_else(|| Error::Invalid("no weight field".into()))?;
    if k == 0 {
        return Err(Error::Invalid("pLin needs degree at least 1".into()));
    }
    let v = vertical(f)?;
    let mut a = alloc::vec![0u32; v.n_weights()];
    a[0] = 1;
    let mut out = truncate(&v, &a, k - 1)?;
    out.degree[0] = k - 1;
    out.name = format!("pLin_{}", f.name);
    Ok(out)
}

/// `pLin` applied `k - 1` times, where `k` is the degree of the first field.
pub fn full_lin(f: &Presentation) -> Result<Presentation> {
    let k = *f.degree.first().ok_or_else(|| Error::Invalid("no weight field".into()))?;
    let mut cur = f.clone();
    for _ in 1..k {
        cur = plin(&cur)?;
    }
    Ok(cur)
}

/// Direct form: the `k`-fold tangent lift restricted to the locus where the
/// original weight equals the sum of the lifted ones, with that redundant
/// first field dropped.
pub fn full_lin_direct(f: &Presentation) -> Result<Presentation> {
    if f.n_weights() != 1 || f.lift_depth != 0 {
        return Err(Error::Invalid("direct linearisation takes a singly graded bundle with unlifted names".into()));
    }
    let k = f.degree[0] as usize;
    let mut cur = f.clone();
    for _ in 0..k {
        cur = tangent_lift(&cur);
    }
    let mut x = alloc::vec![-1i64; k + 1];
    x[0] = 1;
    let mut out = fixed_locus(&cur, &x)?;
    for b in &mut out.blocks {
        let rest: u32 = b.weight[1..].iter().sum();
        if b.weight[0] != rest {
            return Err(Error::Invalid(format!("block {} left the fixed locus", b.name)));
        }
        b.weight.remove(0);
    }
    out.degree = alloc::vec![1; k];
    out.name = format!("Lin_{}", f.name);
    Ok(out)
}

/// Renaming from `full_lin(F)` to `full_lin_direct(F)`: a coordinate with
/// lift label `e'` and first weight `r` becomes label `(r, e')`.
pub fn iterated_to_direct(lin: &Presentation) -> Result<BTreeMap<Var, Var>> {
    let mut map = BTreeMap::new();
    for b in &lin.blocks {
        let lift = if b.kind == VarKind::Base {
            b.lift
        } else {
            let r = b.weight[0];
            if r > 1 {
                return Err(Error::Invalid(format!("block {} has first weight {r}", b.name)));
            }
            Lift(r | b.lift.shifted(1).0)
        };
        for v in b.vars() {
            map.insert(v.clone(), v.with_lift(lift));
        }
    }
    Ok(map)
}

/// `full_lin(F)` written in the coordinate names of `full_lin_direct(F)`.
pub fn full_lin_renamed(f: &Presentation) -> Result<Presentation> {
    let lin = full_lin(f)?;
    let map = iterated_to_direct(&lin)?;
    let mut out = lin.rename(|v| map.get(v).cloned().unwrap_or_else(|| v.clone()));
    out.lift_depth = out.n_weights();
    out.name = format!("Lin_{}", f.name);
    Ok(out)
}

/// Canonical inclusion `F -> pLin(F)`: lifted coordinates pull back to the
/// originals scaled by their first weight.
pub fn iota(f: &Presentation) -> Result<Morphism> {
    let lin = plin(f)?;
    let p = f.lift_depth;
    let mut pullback = BTreeMap::new();
    for b in &lin.blocks {
        for v in b.vars() {
            let img = if b.lift.bit(p) {
                let orig = v.with_lift(b.lift.without(p));
                let orig = Var { kind: f.block(&orig.name, orig.lift).map_or(orig.kind, |ob| ob.kind), ..orig };
                let w = f.weight(&orig)?[0];
                Poly::var(orig).scale(&qi(w as i64))
            } else {
                Poly::var(v.clone())
            };
            pullback.insert(v, img);
        }
    }
    Ok(Morphism::uniform(&format!("iota_{}", f.name), f, pullback))
}

/// Linearisation of a morphism: its tangent map restricted to vertical
/// vectors and truncated like `pLin`.
pub fn plin_morphism(phi: &Morphism, src: &Presentation, tgt: &Presentation) -> Result<Morphism> {
    let lsrc = plin(src)?;
    let ltgt = plin(tgt)?;
    let p_src = src.lift_depth;
    let p_tgt = tgt.lift_depth;
    let keep: BTreeSet<Var> = lsrc.vars().into_iter().collect();
    let base = src.base_vars();
    let mut maps = Vec::new();
    for m in &phi.maps {
        let mut pullback = BTreeMap::new();
        for v in ltgt.vars() {
            let img = if v.lift.bit(p_tgt) {
                let orig = v.with_lift(v.lift.without(p_tgt));
                let orig = tgt.block(&orig.name, orig.lift).map(|b| b.var(orig.index)).ok_or_else(|| Error::Unknown(orig.to_string()))?;
                let law = m.pullback.get(&orig).ok_or_else(|| Error::Unknown(orig.to_string()))?;
                lift_law(law, p_src, &base)
            } else {
                m.pullback.get(&v).cloned().ok_or_else(|| Error::Unknown(v.to_string()))?
            };
            let img = img.restrict_zero(|u| !keep.contains(u));
            if let Some(u) = img.vars().into_iter().find(|u| !keep.contains(u)) {
                return Err(Error::Invalid(format!("linearised pullback of {v} mentions {u}")));
            }
            pullback.insert(v, img);
        }
        maps.push(ChartMap { source: m.source.clone(), target: m.target.clone(), pullback });
    }
    Ok(Morphism { name: format!("pLin_{}", phi.name), maps })
}

/// Full linearisation of a morphism, in iterated names.
pub fn full_lin_morphism(phi: &Morphism, src: &Presentation, tgt: &Presentation) -> Result<Morphism> {
    let k = src.degree[0];
    let (mut m, mut s, mut t) = (phi.clone(), src.clone(), tgt.clone());
    for _ in 1..k {
        m = plin_morphism(&m, &s, &t)?;
        s = plin(&s)?;
        t = plin(&t)?;
    }
    Ok(m)
}

/// Renames both sides of a morphism.
pub fn rename_morphism(phi: &Morphism, src: &BTreeMap<Var, Var>, tgt: &BTreeMap<Var, Var>) -> Morphism {
    let rs = |v: &Var| src.get(v).cloned().unwrap_or_else(|| v.clone());
    Morphism {
        name: phi.name.clone(),
        maps: phi
            .maps
            .iter()
            .map(|m| ChartMap {
                source: m.source.clone(),
                target: m.target.clone(),
                pullback: m.pullback.iter().map(|(v, p)| (tgt.get(v).cloned().unwrap_or_else(|| v.clone()), p.rename(rs))).collect(),
            })
            .collect(),
    }
}

/// `D^g`: weight field `i` of the result is field `g(i)` of `d`.
pub fn flip(d: &Presentation, g: &[usize]) -> Result<Presentation> {
    if g.len() != d.n_weights() || !perm::is_permutation(g) {
        return Err(Error::Invalid(format!("{g:?} is not a permutation of the {} weight fields", d.n_weights())));
    }
    let mut out = d.clone();
    for b in &mut out.blocks {
        b.weight = perm::act(&b.weight, g);
    }
    out.degree = perm::act(&d.degree, g);
    out.name = format!("{}_flip", d.name);
    Ok(out)
}

/// Canonical `sigma_g: D -> D^g`, with `sigma_g^*(y^(e)) = y^(e.g)`, for a
/// presentation in direct names.
pub fn canonical_sigma(d: &Presentation, g: &[usize]) -> Result<Morphism> {
    let k = d.n_weights();
    if g.len() != k || !perm::is_permutation(g) {
        return Err(Error::Invalid(format!("{g:?} is not a permutation of {k} weight fields")));
    }
    let mut pullback = BTreeMap::new();
    for v in d.vars() {
        let img = if v.is_base() { v.clone() } else { v.with_lift(v.lift.act(g)) };
        if !d.has_var(&img) {
            return Err(Error::Invalid(format!("{img} missing; the presentation is not in direct names")));
        }
        pullback.insert(v, Poly::var(img));
    }
    Ok(Morphism::uniform(&format!("sigma{}", perm_label(g)), d, pullback))
}

pub fn perm_label(g: &[usize]) -> alloc::string::String {
    g.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join("")
}

/// Generators `sigma_{s_i}` for the adjacent transpositions.
pub fn canonical_generators(d: &Presentation) -> Result<Vec<Morphism>> {
    let k = d.n_weights();
    (0..k.saturating_sub(1)).map(|i| canonical_sigma(d, &perm::transposition(k, i, i + 1))).collect()
}

pub fn all_perms(k: usize) -> Vec<Perm> {
    perm::all(k)
}
