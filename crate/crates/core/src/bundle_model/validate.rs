use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::linear::{base_jacobian, constant_matrix, linear_block, weight_classes};
use super::numeric::{sample_points, NumericInstance, DEFAULT_DEGREE_CAP};
use super::presentation::{FnDecl, Presentation};
use crate::graded_algebra::linalg;
use crate::graded_algebra::{Name, Poly, Var, VarKind, WeightCheck};
use crate::report::Report;

fn first_or_ok(v: &[String]) -> String {
    v.first().cloned().unwrap_or_else(|| "ok".into())
}

/// Structural and algebraic checks on a presentation, after symmetrising
/// coefficient tensors in their lower indices.
pub fn validate(p: &Presentation) -> Report {
    let (sym, warnings) = p.symmetrised();
    let mut r = validate_exact(&sym);
    r.warnings.splice(0..0, warnings);
    r
}

fn validate_exact(p: &Presentation) -> Report {
    let mut r = Report::new();
    let n = p.n_weights();
    let weights = p.weight_table();
    let known = |v: &Var| p.has_var(v);

    let mut errs = Vec::new();
    let mut keys = BTreeSet::new();
    for b in &p.blocks {
        if !keys.insert(b.key()) {
            errs.push(format!("block {} declared twice", b.name));
        }
        if b.weight.len() != n {
            errs.push(format!("block {} has {} weight entries, expected {n}", b.name, b.weight.len()));
            continue;
        }
        match b.kind {
            VarKind::Base if b.weight.iter().any(|w| *w != 0) => errs.push(format!("base block {} has nonzero weight", b.name)),
            VarKind::Fibre if b.weight.iter().all(|w| *w == 0) => errs.push(format!("fibre block {} has zero weight", b.name)),
            _ => {}
        }
        if b.weight.iter().zip(&p.degree).any(|(w, d)| w > d) {
            errs.push(format!("block {} exceeds the degree bounds {:?}", b.name, p.degree));
        }
    }
    r.push("weights", errs.is_empty(), first_or_ok(&errs));

    let mut errs = Vec::new();
    let vars: BTreeSet<Var> = p.vars().into_iter().collect();
    for t in &p.transitions {
        if !p.charts.contains(&t.from) || !p.charts.contains(&t.to) {
            errs.push(format!("transition {} uses an undeclared chart", t.label()));
        }
        let laws: BTreeSet<Var> = t.laws.keys().cloned().collect();
        if let Some(v) = vars.difference(&laws).next() {
            errs.push(format!("transition {} has no law for {v}", t.label()));
        }
        if let Some(v) = laws.difference(&vars).next() {
            errs.push(format!("transition {} has a law for unknown {v}", t.label()));
        }
        for l in t.laws.values() {
            if let Some(u) = l.vars().into_iter().find(|u| !known(u)) {
                errs.push(format!("transition {} mentions unknown {u}", t.label()));
            }
            for f in l.fns() {
                match p.fn_decl(&f.name) {
                    None => errs.push(format!("undeclared symbol {}", f.name)),
                    Some(d) if d.symmetric != f.symmetric => errs.push(format!("symbol {} used with the wrong symmetry", f.name)),
                    _ => {}
                }
            }
        }
    }
    r.push("coverage", errs.is_empty(), first_or_ok(&errs));
    if !r.passed() {
        return r;
    }

    let w_of = |v: &Var, s: usize| -> i64 { weights.get(&(v.name.clone(), v.lift)).map_or(0, |w| w[s] as i64) };
    let mut errs = Vec::new();
    let mut base_errs = Vec::new();
    let mut tower_errs = Vec::new();
    for t in &p.transitions {
        for (v, l) in &t.laws {
            let target = &weights[&(v.name.clone(), v.lift)];
            for s in 0..n {
                match l.weight_check(|u| w_of(u, s)) {
                    WeightCheck::Zero => {}
                    WeightCheck::Homogeneous(d) if d == target[s] as i64 => {}
                    WeightCheck::Homogeneous(d) => errs.push(format!("law of {v} in {} has weight {d} in field {s}, expected {}", t.label(), target[s])),
                    WeightCheck::Inhomogeneous(ms) => {
                        let bad = ms.iter().find(|(_, d)| *d != target[s] as i64).map(|(m, d)| format!("{m} (weight {d})"));
                        errs.push(format!("law of {v} in {} is inhomogeneous in field {s}: {}", t.label(), bad.unwrap_or_default()))
                    }
                }
            }
            if v.is_base() && l.vars().iter().any(|u| !u.is_base()) {
                base_errs.push(format!("base law of {v} in {} involves fibre coordinates", t.label()));
            }
            if !v.is_base() {
                for (m, _) in l.terms() {
                    let same: Vec<&Var> = m.vars.iter().map(|(u, _)| u).filter(|u| &weights[&(u.name.clone(), u.lift)] == target).collect();
                    let fibre = m.degree_where(|u| !u.is_base());
                    if !same.is_empty() && fibre != 1 {
                        tower_errs.push(format!("law of {v} in {}: {m} is not linear in top-weight coordinates", t.label()));
                    }
                }
            }
        }
    }
    r.push("homogeneity", errs.is_empty(), first_or_ok(&errs));
    r.push("base-laws", base_errs.is_empty(), first_or_ok(&base_errs));
    r.push("tower", tower_errs.is_empty(), first_or_ok(&tower_errs));
    r.absorb("", invertibility(p));
    r
}

fn is_declared(decls: &[FnDecl], n: &Name) -> bool {
    decls.iter().any(|d| &d.name == n && (d.invertible || d.inverse.is_some()) || d.inverse.as_ref() == Some(n))
}

fn declared_entry(p: &Poly, decls: &[FnDecl], base: bool) -> bool {
    let mut terms = p.terms();
    let Some((m, _)) = terms.next() else { return true };
    if terms.next().is_some() || !m.vars.is_empty() || m.fns.len() != 1 || m.fns[0].1 != 1 {
        return false;
    }
    let f = &m.fns[0].0;
    // fibre blocks of jet-like bundles are Jacobians of the base map
    let jacobian = f.lower.is_empty() && f.upper.len() == 1 && f.deriv.len() == 1;
    let slot = f.lower.len() == 1 && f.upper.len() == 1 && f.deriv.is_empty();
    let shape = if base { jacobian } else { slot || jacobian };
    shape && is_declared(decls, &f.name)
}

/// Entry of a product of declared fibre blocks, as left by composing
/// transitions: every term is a constant times declared slot symbols.
fn product_entry(p: &Poly, decls: &[FnDecl]) -> bool {
    p.terms().all(|(m, _)| {
        m.vars.is_empty()
            && m.fns.iter().all(|(f, _)| f.lower.len() == 1 && f.upper.len() == 1 && f.deriv.is_empty() && is_declared(decls, &f.name))
    })
}

/// Every linear block is invertible: constant with nonzero determinant, or
/// built from symbols declared invertible (or products of such blocks) and
/// nonsingular at sample points.
pub fn invertibility(p: &Presentation) -> Report {
    let mut r = Report::new();
    let inst = NumericInstance::new(&[p], 0, DEFAULT_DEGREE_CAP);
    let points = sample_points(p, 0, 3);
    let mut errs = Vec::new();
    let base = p.base_vars();
    for t in &p.transitions {
        let mut blocks: Vec<(String, Vec<Var>, Vec<Vec<Poly>>, bool)> = Vec::new();
        if !base.is_empty() {
            blocks.push(("base".into(), base.clone(), base_jacobian(&t.laws, &base), true));
        }
        for (w, vars) in weight_classes(p) {
            blocks.push((format!("weight {w:?}"), vars.clone(), linear_block(&t.laws, &vars, &vars), false));
        }
        for (label, vars, m, is_base) in blocks {
            if let Some(c) = constant_matrix(&m) {
                if linalg::rank(&c) < vars.len() {
                    errs.push(format!("{}: {label} block is singular", t.label()));
                }
                continue;
            }
            let declared = m.iter().flatten().all(|e| declared_entry(e, &p.fns, is_base));
            let product = !is_base && m.iter().flatten().all(|e| product_entry(e, &p.fns));
            if !declared && !product {
                errs.push(format!("{}: {label} block is not built from declared-invertible symbols", t.label()));
                continue;
            }
            for pt in &points {
                let num: Option<linalg::Matrix> = m.iter().map(|row| row.iter().map(|e| inst.eval(e, pt).ok()).collect()).collect();
                match num {
                    Some(num) if linalg::rank(&num) == vars.len() => {}
                    _ => {
                        errs.push(format!("{}: {label} block is singular at a sample point", t.label()));
                        break;
                    }
                }
            }
        }
    }
    r.push("invertibility", errs.is_empty(), first_or_ok(&errs));
    r
}
