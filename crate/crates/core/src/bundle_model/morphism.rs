use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::numeric::{sample_points, NumericInstance, DEFAULT_DEGREE_CAP, DEFAULT_SAMPLES};
use super::presentation::Presentation;
use crate::error::{Error, Result};
use crate::graded_algebra::{Name, Poly, Var, WeightCheck};
use crate::report::Report;

/// Local form of a bundle map over one source chart: every coordinate of the
/// target chart pulled back to a polynomial in source coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartMap {
    pub source: Name,
    pub target: Name,
    pub pullback: BTreeMap<Var, Poly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub name: String,
    pub maps: Vec<ChartMap>,
}

/// How morphism components are required to respect weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMatch {
    /// Every weight field separately; source and target have the same count.
    Exact,
    /// Only the total weight.
    Total,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub weights: WeightMatch,
    pub seed: u64,
    pub samples: usize,
    pub degree_cap: u32,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { weights: WeightMatch::Exact, seed: 0, samples: DEFAULT_SAMPLES, degree_cap: DEFAULT_DEGREE_CAP }
    }
}

impl Morphism {
    pub fn identity(p: &Presentation) -> Morphism {
        let pullback: BTreeMap<Var, Poly> = p.vars().into_iter().map(|v| (v.clone(), Poly::var(v))).collect();
        Morphism {
            name: format!("id_{}", p.name),
            maps: p.charts.iter().map(|c| ChartMap { source: c.clone(), target: c.clone(), pullback: pullback.clone() }).collect(),
        }
    }

    /// Same substitution in every chart of `p`, each chart mapping to itself.
    pub fn uniform(name: &str, p: &Presentation, pullback: BTreeMap<Var, Poly>) -> Morphism {
        Morphism {
            name: name.to_string(),
            maps: p.charts.iter().map(|c| ChartMap { source: c.clone(), target: c.clone(), pullback: pullback.clone() }).collect(),
        }
    }

    pub fn chart(&self, source: &str) -> Option<&ChartMap> {
        self.maps.iter().find(|m| &*m.source == source)
    }

    /// `second ∘ first`: pull back through `second`, then through `first`.
    pub fn compose(first: &Morphism, second: &Morphism) -> Result<Morphism> {
        let mut maps = Vec::new();
        for m in &first.maps {
            let n = second
                .chart(&m.target)
                .ok_or_else(|| Error::Invalid(format!("{} has no chart map from {}", second.name, m.target)))?;
            let mut pullback = BTreeMap::new();
            for (v, p) in &n.pullback {
                pullback.insert(v.clone(), p.substitute(&m.pullback)?);
            }
            maps.push(ChartMap { source: m.source.clone(), target: n.target.clone(), pullback });
        }
        Ok(Morphism { name: format!("{}.{}", second.name, first.name), maps })
    }

    pub fn is_identity(&self) -> bool {
        self.maps.iter().all(|m| m.source == m.target && m.pullback.iter().all(|(v, p)| p.as_var() == Some(v)))
    }

    /// Compares pullbacks chart by chart; returns the first difference.
    pub fn compare(&self, other: &Morphism) -> core::result::Result<(), String> {
        for m in &self.maps {
            let Some(n) = other.chart(&m.source) else {
                return Err(format!("chart {} missing", m.source));
            };
            if m.target != n.target {
                return Err(format!("chart {} maps to {} vs {}", m.source, m.target, n.target));
            }
            for (v, p) in &m.pullback {
                let q = n.pullback.get(v).cloned().unwrap_or_default();
                if *p != q {
                    return Err(format!("pullback of {v} in chart {}: {p}  vs  {q}", m.source));
                }
            }
            if n.pullback.len() != m.pullback.len() {
                return Err(format!("pullback domains differ in chart {}", m.source));
            }
        }
        Ok(())
    }
}

fn weight_of(p: &Presentation, v: &Var, mode: WeightMatch, s: usize) -> Result<i64> {
    let w = p.weight(v)?;
    Ok(match mode {
        WeightMatch::Exact => w[s] as i64,
        WeightMatch::Total => w.iter().map(|x| *x as i64).sum(),
    })
}

/// Checks that `phi` is a well-formed, weight-preserving map `src -> tgt`
/// intertwining the transition laws. Intertwining is decided symbolically,
/// falling back to seeded numeric evaluation when an opaque coefficient
/// function would have to be composed with a nontrivial base change.
pub fn validate_morphism(phi: &Morphism, src: &Presentation, tgt: &Presentation, opts: &CheckOptions) -> Report {
    let mut r = Report::new();
    let comps = match opts.weights {
        WeightMatch::Exact if src.n_weights() != tgt.n_weights() => {
            r.push("weights", false, format!("{} vs {} weight fields", src.n_weights(), tgt.n_weights()));
            return r;
        }
        WeightMatch::Exact => src.n_weights(),
        WeightMatch::Total => 1,
    };
    let mut shape = Vec::new();
    let mut weight_errors = Vec::new();
    for m in &phi.maps {
        if !src.charts.contains(&m.source) || !tgt.charts.contains(&m.target) {
            shape.push(format!("unknown chart pair {}->{}", m.source, m.target));
        }
        for v in tgt.vars() {
            let Some(p) = m.pullback.get(&v) else {
                shape.push(format!("no pullback of {v} in chart {}", m.source));
                continue;
            };
            for u in p.vars() {
                if !src.has_var(&u) {
                    shape.push(format!("pullback of {v} mentions unknown {u}"));
                }
            }
            for s in 0..comps {
                let Ok(d) = weight_of(tgt, &v, opts.weights, s) else { continue };
                let check = p.weight_check(|u| weight_of(src, u, opts.weights, s).unwrap_or(i64::MIN / 4));
                match check {
                    WeightCheck::Zero => {}
                    WeightCheck::Homogeneous(e) if e == d => {}
                    _ => weight_errors.push(format!("pullback of {v} in chart {} is not of weight {d} in field {s}", m.source)),
                }
            }
        }
    }
    r.push("shape", shape.is_empty(), shape.first().cloned().unwrap_or_else(|| "ok".into()));
    r.push("homogeneity", weight_errors.is_empty(), weight_errors.first().cloned().unwrap_or_else(|| "ok".into()));
    if !shape.is_empty() {
        return r;
    }

    let mut failures = Vec::new();
    let mut numeric_used = false;
    for t in &src.transitions {
        let (Some(mu), Some(mv)) = (phi.chart(&t.from), phi.chart(&t.to)) else {
            continue;
        };
        let target_laws = if mu.target == mv.target {
            None
        } else {
            match tgt.transition(&mu.target, &mv.target) {
                Some(tt) => Some(&tt.laws),
                None => {
                    failures.push(format!("target has no transition {}->{}", mu.target, mv.target));
                    continue;
                }
            }
        };
        match intertwines_symbolic(&mv.pullback, &t.laws, &mu.pullback, target_laws) {
            Ok(None) => {}
            Ok(Some(e)) => failures.push(format!("{}: {e}", t.label())),
            Err(Error::OpaqueComposition(_)) => {
                numeric_used = true;
                if let Err(e) = intertwines_numeric(src, tgt, &mv.pullback, &t.laws, &mu.pullback, target_laws, opts, &t.label()) {
                    failures.push(format!("{}: {e}", t.label()));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", t.label())),
        }
    }
    let how = if numeric_used { format!("numeric at {} points where needed", opts.samples) } else { "exact".into() };
    r.push("intertwining", failures.is_empty(), failures.first().cloned().unwrap_or(how));
    r
}

type Laws = BTreeMap<Var, Poly>;

fn intertwines_symbolic(phi_v: &Laws, t: &Laws, phi_u: &Laws, t_target: Option<&Laws>) -> Result<Option<String>> {
    for (a, p) in phi_v {
        let lhs = p.substitute(t)?;
        let rhs = match t_target {
            Some(tt) => tt.get(a).ok_or_else(|| Error::Unknown(a.to_string()))?.substitute(phi_u)?,
            None => phi_u.get(a).cloned().ok_or_else(|| Error::Unknown(a.to_string()))?,
        };
        if lhs != rhs {
            return Ok(Some(format!("component {a} differs: {}", &lhs - &rhs)));
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn intertwines_numeric(
    src: &Presentation,
    tgt: &Presentation,
    phi_v: &Laws,
    t: &Laws,
    phi_u: &Laws,
    t_target: Option<&Laws>,
    opts: &CheckOptions,
    label: &str,
) -> Result<()> {
    let inst = NumericInstance::new(&[src, tgt], opts.seed, opts.degree_cap);
    for (i, pt) in sample_points(src, opts.seed, opts.samples).into_iter().enumerate() {
        let moved = inst.apply(t, &pt)?;
        let lhs = inst.apply(phi_v, &moved)?;
        let image = inst.apply(phi_u, &pt)?;
        let rhs = match t_target {
            Some(tt) => inst.apply(tt, &image)?,
            None => image,
        };
        if lhs != rhs {
            return Err(Error::Eval(format!("{label}: sample {i} disagrees")));
        }
    }
    Ok(())
}
