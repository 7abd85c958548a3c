use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use num_traits::Zero;

use super::require_double;
use crate::bundle_model::morphism::{CheckOptions, Morphism};
use crate::bundle_model::numeric::{rng_for, small_rational, NumericInstance};
use crate::error::{Error, Result};
use crate::graded_algebra::{linalg, name, Lift, Poly, Var, VarKind, Q};
use crate::report::Report;
use crate::symmetric::SymmetricVB;

fn formal(n: &str, size: usize) -> Vec<Var> {
    (1..=size as u32).map(|i| Var::new(VarKind::Fibre, name(n), Lift::NONE, i)).collect()
}

/// `<Psi1, Psi2> = Psi1(sigma(d)) - Psi2(d)` on `E = D*_B` over `C*`,
/// expanded symbolically on one chart. A covector `Psi_j` over `b_j` has fibre
/// coordinates `(b_j, Q_j)` (its footpoint in `B` and its `(0,1)` part) and
/// core part `alpha`; `d` has coordinates `(y01 = sigma(b1), y10 = b2, z = c)`.
#[derive(Clone, Debug)]
pub struct SkewForm {
    pub chart: crate::graded_algebra::Name,
    pub omega: Poly,
    /// Fibre coordinates of `E -> C*` for the first and second argument.
    pub first: Vec<Var>,
    pub second: Vec<Var>,
    pub alpha: Vec<Var>,
    pub core_shift: Vec<Var>,
    /// `Omega[r][s]`: coefficient of `first[r] * second[s]`.
    pub matrix: Vec<Vec<Poly>>,
    pub report: Report,
}

/// Formal arguments of the form.
struct Formal {
    b1: Vec<Var>,
    q1: Vec<Var>,
    b2: Vec<Var>,
    q2: Vec<Var>,
    alpha: Vec<Var>,
    c: Vec<Var>,
}

pub fn skew_form(s: &SymmetricVB, chart: &str, seed: u64, samples: usize) -> Result<SkewForm> {
    let dc = require_double(&s.d)?;
    let r = dc.side10.len();
    let f = Formal { b1: formal("b1_", r), q1: formal("Q1_", r), b2: formal("b2_", r), q2: formal("Q2_", r), alpha: formal("alpha", dc.core.len()), c: formal("c", dc.core.len()) };
    let sigma = &s.generators.first().and_then(|g| g.chart(chart)).ok_or_else(|| Error::Unknown(chart.into()))?.pullback;
    let mut report = Report::new();

    let on_b1: BTreeMap<Var, Poly> = dc.side10.iter().zip(&f.b1).map(|(v, b)| (v.clone(), Poly::var(b.clone()))).chain(dc.side01.iter().chain(&dc.core).map(|v| (v.clone(), Poly::zero()))).collect();
    let a1: Vec<Poly> = dc.side01.iter().map(|v| sigma[v].substitute(&on_b1)).collect::<Result<_>>()?;
    let mut d: BTreeMap<Var, Poly> = BTreeMap::new();
    for (v, p) in dc.side01.iter().zip(&a1) {
        d.insert(v.clone(), p.clone());
    }
    for (v, b) in dc.side10.iter().zip(&f.b2) {
        d.insert(v.clone(), Poly::var(b.clone()));
    }
    for (v, c) in dc.core.iter().zip(&f.c) {
        d.insert(v.clone(), Poly::var(c.clone()));
    }
    let sd: BTreeMap<Var, Poly> = s.d.fibre_vars().into_iter().map(|v| Ok((v.clone(), sigma[&v].substitute(&d)?))).collect::<Result<_>>()?;
    let foot = dc.side10.iter().zip(&f.b1).all(|(v, b)| sd[v].as_var() == Some(b));
    report.push("footpoint", foot, if foot { "sigma(d) lies over b1" } else { "sigma(d) does not lie over b1" });

    let dot = |qs: &[Var], ys: &[Poly]| -> Poly { qs.iter().zip(ys).map(|(q, y)| &Poly::var(q.clone()) * y).sum() };
    let sy01: Vec<Poly> = dc.side01.iter().map(|v| sd[v].clone()).collect();
    let sz: Vec<Poly> = dc.core.iter().map(|v| sd[v].clone()).collect();
    let dz: Vec<Poly> = f.c.iter().map(|c| Poly::var(c.clone())).collect();
    let omega = &(&dot(&f.q1, &sy01) + &dot(&f.alpha, &sz)) - &(&dot(&f.q2, &a1) + &dot(&f.alpha, &dz));

    let free = f.c.iter().all(|c| !omega.mentions(c));
    report.push("core-independence", free, if free { "independent of the core part of d" } else { "depends on the core part of d" });
    let first: Vec<Var> = f.b1.iter().chain(&f.q1).cloned().collect();
    let second: Vec<Var> = f.b2.iter().chain(&f.q2).cloned().collect();
    let bilinear = omega.terms().all(|(m, _)| m.degree_where(|v| first.contains(v)) == 1 && m.degree_where(|v| second.contains(v)) == 1);
    report.push("bilinear", bilinear, if bilinear { "bilinear in the two arguments" } else { "not bilinear" });

    let swap: BTreeMap<Var, Poly> = first.iter().zip(&second).flat_map(|(a, b)| [(a.clone(), Poly::var(b.clone())), (b.clone(), Poly::var(a.clone()))]).collect();
    let swapped = omega.substitute(&swap)?;
    let skew = &swapped + &omega;
    report.push("skew", skew.is_zero(), if skew.is_zero() { "<Psi2, Psi1> = -<Psi1, Psi2>".into() } else { format!("<Psi2, Psi1> + <Psi1, Psi2> = {skew}") });

    let matrix: Vec<Vec<Poly>> = first
        .iter()
        .map(|u| second.iter().map(|v| omega.formal_partial(u).formal_partial(v)).collect())
        .collect();
    let n = first.len();
    let inst = NumericInstance::new(&[&s.d], seed, crate::bundle_model::numeric::DEFAULT_DEGREE_CAP);
    let mut rng = rng_for(seed, &format!("form:{chart}"));
    let mut full = 0usize;
    let mut tried = 0usize;
    for _ in 0..samples {
        let mut pt: BTreeMap<Var, Q> = s.d.base_vars().into_iter().map(|v| (v, small_rational(&mut rng))).collect();
        pt.extend(f.alpha.iter().map(|a| (a.clone(), small_rational(&mut rng))));
        let m: Result<linalg::Matrix> = matrix.iter().map(|row| row.iter().map(|p| inst.eval(p, &pt)).collect()).collect();
        if let Ok(m) = m {
            tried += 1;
            if linalg::rank(&m) == n {
                full += 1;
            }
        }
    }
    report.push("nondegenerate", full > 0, format!("full rank {n} at {full} of {tried} sampled points"));
    if full > 0 && full < tried {
        report.warn(format!("form degenerate at {} sampled points", tried - full));
    }
    Ok(SkewForm { chart: name(chart), omega, first, second, alpha: f.alpha, core_shift: f.c, matrix, report })
}

fn form_value(f: &SkewForm, inst: &NumericInstance, base: &BTreeMap<Var, Q>, psi1: &[Q], psi2: &[Q], alpha: &[Q]) -> Result<Q> {
    let mut pt = base.clone();
    pt.extend(f.first.iter().cloned().zip(psi1.iter().cloned()));
    pt.extend(f.second.iter().cloned().zip(psi2.iter().cloned()));
    pt.extend(f.alpha.iter().cloned().zip(alpha.iter().cloned()));
    inst.eval(&f.omega, &pt)
}

/// Isotropy of the graph of `phi^v` for the difference of the skew forms,
/// where `phi: D' -> D` and `Psi' = Psi ∘ phi`, at sampled points.
pub fn isotropy_report(phi: &Morphism, src: &SymmetricVB, tgt: &SymmetricVB, opts: &CheckOptions) -> Result<Report> {
    let sdc = require_double(&src.d)?;
    let tdc = require_double(&tgt.d)?;
    let inst = NumericInstance::new(&[&src.d, &tgt.d], opts.seed, opts.degree_cap);
    let mut forms: BTreeMap<(bool, crate::graded_algebra::Name), SkewForm> = BTreeMap::new();
    let mut r = Report::new();
    let mut bad = None;
    let mut rng = rng_for(opts.seed, &format!("isotropy:{}", phi.name));
    let per = (opts.samples / phi.maps.len().max(1)).max(1);
    'outer: for m in &phi.maps {
        for (is_src, sv, chart) in [(true, src, &m.source), (false, tgt, &m.target)] {
            if !forms.contains_key(&(is_src, chart.clone())) {
                forms.insert((is_src, chart.clone()), skew_form(sv, chart, opts.seed, 1)?);
            }
        }
        let fs = &forms[&(true, m.source.clone())];
        let ft = &forms[&(false, m.target.clone())];
        for _ in 0..per {
            let xs: BTreeMap<Var, Q> = src.d.base_vars().into_iter().map(|v| (v, small_rational(&mut rng))).collect();
            let alpha: Vec<Q> = tdc.core.iter().map(|_| small_rational(&mut rng)).collect();
            let mut args = Vec::new();
            for _ in 0..2 {
                let b: Vec<Q> = sdc.side10.iter().map(|_| small_rational(&mut rng)).collect();
                let qv: Vec<Q> = tdc.side01.iter().map(|_| small_rational(&mut rng)).collect();
                args.push((b, qv));
            }
            let step = (|| -> Result<Option<(Q, Q)>> {
                let mut omega_t_args = Vec::new();
                let mut omega_s_args = Vec::new();
                let mut alpha_src = None;
                let mut xt = None;
                for (b, qv) in &args {
                    let mut pt = xs.clone();
                    pt.extend(sdc.side10.iter().cloned().zip(b.iter().cloned()));
                    // image footpoint: phi evaluated on (x', b', 0, 0)
                    let mut zero = pt.clone();
                    zero.extend(sdc.side01.iter().chain(&sdc.core).map(|v| (v.clone(), Q::zero())));
                    let x: BTreeMap<Var, Q> = tgt.d.base_vars().into_iter().map(|v| Ok((v.clone(), inst.eval(&m.pullback[&v], &zero)?))).collect::<Result<_>>()?;
                    let bt: Vec<Q> = tdc.side10.iter().map(|v| inst.eval(&m.pullback[v], &zero)).collect::<Result<_>>()?;
                    // Psi ∘ phi is linear in (y01', z') over the fixed footpoint
                    let mut pull = Poly::zero();
                    for (v, qa) in tdc.side01.iter().zip(qv) {
                        pull = &pull + &m.pullback[v].scale(qa);
                    }
                    for (v, al) in tdc.core.iter().zip(&alpha) {
                        pull = &pull + &m.pullback[v].scale(al);
                    }
                    let lin = inst.partial_eval(&pull, &pt)?;
                    let coeff = |v: &Var| -> Q { lin.formal_partial(v).as_constant().unwrap_or_default() };
                    let q_src: Vec<Q> = sdc.side01.iter().map(coeff).collect();
                    let a_src: Vec<Q> = sdc.core.iter().map(coeff).collect();
                    if alpha_src.as_ref().is_some_and(|a| *a != a_src) {
                        return Err(Error::Invalid("pulled back covectors lie over different points of C*".into()));
                    }
                    alpha_src = Some(a_src);
                    if xt.as_ref().is_some_and(|x0| *x0 != x) {
                        return Err(Error::Invalid("footpoints over different base points".into()));
                    }
                    xt = Some(x);
                    omega_t_args.push(bt.into_iter().chain(qv.iter().cloned()).collect::<Vec<Q>>());
                    omega_s_args.push(b.iter().cloned().chain(q_src).collect::<Vec<Q>>());
                }
                let wt = form_value(ft, &inst, xt.as_ref().expect("two arguments"), &omega_t_args[0], &omega_t_args[1], &alpha)?;
                let ws = form_value(fs, &inst, &xs, &omega_s_args[0], &omega_s_args[1], alpha_src.as_ref().expect("two arguments"))?;
                Ok(Some((wt, ws)))
            })();
            match step {
                Ok(Some((wt, ws))) if wt == ws => {}
                Ok(Some((wt, ws))) => {
                    bad = Some(format!("chart {} -> {}: <Psi1, Psi2> = {wt} but <Psi1', Psi2'> = {ws}", m.source, m.target));
                    break 'outer;
                }
                Ok(None) => {}
                Err(e) => {
                    bad = Some(e.to_string());
                    break 'outer;
                }
            }
        }
    }
    let n = per * phi.maps.len();
    r.push("isotropy", bad.is_none(), bad.unwrap_or_else(|| format!("graph isotropic at {n} sampled points")));
    Ok(r)
}
