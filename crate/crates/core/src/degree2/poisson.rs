use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use alloc::string::ToString;

use super::algebroid::{Algebroid, Section};
use super::dual::{dual_dvb, DualDVB, Leg};
use super::{coefficient_of, require_double};
use crate::error::{Error, Result};
use crate::graded_algebra::{name, q, qi, Poly, Var, VarKind};
use crate::report::Report;
use crate::symmetric::{roundtrip_iso, SymmetricVB};

/// A bivector `sum_{u<v} L^{uv} d_u ∧ d_v`, stored on ordered pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bivector {
    entries: BTreeMap<(Var, Var), Poly>,
}

impl Bivector {
    pub fn new() -> Bivector {
        Bivector::default()
    }

    pub fn get(&self, u: &Var, v: &Var) -> Poly {
        if u < v {
            self.entries.get(&(u.clone(), v.clone())).cloned().unwrap_or_default()
        } else if u > v {
            -self.entries.get(&(v.clone(), u.clone())).cloned().unwrap_or_default()
        } else {
            Poly::zero()
        }
    }

    /// Adds `p d_u ∧ d_v`.
    pub fn add(&mut self, u: &Var, v: &Var, p: &Poly) {
        if u == v || p.is_zero() {
            return;
        }
        let (key, p) = if u < v { ((u.clone(), v.clone()), p.clone()) } else { ((v.clone(), u.clone()), -p.clone()) };
        let e = self.entries.entry(key.clone()).or_default();
        *e = &*e + &p;
        if e.is_zero() {
            self.entries.remove(&key);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Var, Var), &Poly)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, c: &crate::graded_algebra::Q) -> Bivector {
        let mut out = Bivector::new();
        for ((u, v), p) in &self.entries {
            out.add(u, v, &p.scale(c));
        }
        out
    }

    pub fn sub(&self, o: &Bivector) -> Bivector {
        let mut out = self.clone();
        for ((u, v), p) in &o.entries {
            out.add(u, v, &-p.clone());
        }
        out
    }

    fn coordinates(&self) -> BTreeSet<Var> {
        self.entries.keys().flat_map(|(u, v)| [u.clone(), v.clone()]).collect()
    }

    /// `{f, g} = L^{st} d_s f d_t g`.
    pub fn bracket(&self, f: &Poly, g: &Poly) -> Poly {
        let mut out = Poly::zero();
        for ((u, v), p) in &self.entries {
            let t = &(&f.formal_partial(u) * &g.formal_partial(v)) - &(&f.formal_partial(v) * &g.formal_partial(u));
            out = &out + &(p * &t);
        }
        out
    }

    /// Nonzero components of `sum_cyc L^{us} d_s L^{vw}`; `[L, L] = 0` iff empty.
    pub fn schouten(&self) -> Vec<(Var, Var, Var, Poly)> {
        let coords: Vec<Var> = self.coordinates().into_iter().collect();
        let mut out = Vec::new();
        for (i, u) in coords.iter().enumerate() {
            for (j, v) in coords.iter().enumerate().skip(i + 1) {
                for w in coords.iter().skip(j + 1) {
                    let term = |a: &Var, b: &Var, c: &Var| -> Poly { coords.iter().map(|s| &self.get(a, s) * &self.get(b, c).formal_partial(s)).sum() };
                    let total = &(&term(u, v, w) + &term(v, w, u)) + &term(w, u, v);
                    if !total.is_zero() {
                        out.push((u.clone(), v.clone(), w.clone(), total));
                    }
                }
            }
        }
        out
    }

    /// `(L_X L)^{uv} = X(L^{uv}) - L^{sv} d_s X^u - L^{us} d_s X^v`.
    pub fn lie_derivative(&self, x: &BTreeMap<Var, Poly>) -> Bivector {
        let mut coords = self.coordinates();
        coords.extend(x.keys().cloned());
        let coords: Vec<Var> = coords.into_iter().collect();
        let apply = |h: &Poly| -> Poly { x.iter().map(|(s, c)| c * &h.formal_partial(s)).sum() };
        let comp = |u: &Var| x.get(u).cloned().unwrap_or_default();
        let mut out = Bivector::new();
        for (i, u) in coords.iter().enumerate() {
            for v in &coords[i + 1..] {
                let mut p = apply(&self.get(u, v));
                for s in &coords {
                    p = &p - &(&self.get(s, v) * &comp(u).formal_partial(s));
                    p = &p - &(&self.get(u, s) * &comp(v).formal_partial(s));
                }
                out.add(u, v, &p);
            }
        }
        out
    }

    /// Pushforward by a diffeomorphism given by `pull` (new coordinates in
    /// terms of old ones) and `inverse` (old in terms of new).
    pub fn pushforward(&self, pull: &BTreeMap<Var, Poly>, inverse: &BTreeMap<Var, Poly>) -> Result<Bivector> {
        let keys: Vec<&Var> = pull.keys().collect();
        let mut out = Bivector::new();
        for (i, u) in keys.iter().enumerate() {
            for v in &keys[i + 1..] {
                let p = self.bracket(&pull[*u], &pull[*v]).substitute(inverse)?;
                out.add(u, v, &p);
            }
        }
        Ok(out)
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        for ((u, v), p) in &self.entries {
            if !s.is_empty() {
                s.push_str(" + ");
            }
            s.push_str(&format!("({p}) d{u}^d{v}"));
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}

/// The linear Poisson tensor of the algebroid on `D -> A`, on `D*_A`.
#[derive(Clone, Debug)]
pub struct PoissonTensor {
    pub dual: DualDVB,
    pub lambda: Bivector,
    pub report: Report,
}

fn linear_function(alg: &Algebroid, dual: &DualDVB, s: &Section) -> Result<Poly> {
    let mut out = Poly::zero();
    for (v, c) in alg.frame_e.iter().zip(&s.e).chain(alg.frame_f.iter().zip(&s.f)) {
        let p = dual.dual_of(v).ok_or_else(|| Error::Unknown(v.to_string()))?;
        out = &out + &(c * &Poly::var(p.clone()));
    }
    Ok(out)
}

/// `1/2 s_ab p_i d_pa ∧ d_pb + d_pa ∧ d_side_a` for coefficients `s`.
fn closed_form(s: &dyn Fn(usize, usize, usize) -> Poly, side_duals: &[Var], core_duals: &[Var], side: &[Var]) -> Bivector {
    let mut out = Bivector::new();
    for (a, pa) in side_duals.iter().enumerate() {
        for (b, pb) in side_duals.iter().enumerate() {
            for (i, pi) in core_duals.iter().enumerate() {
                let c = s(a, b, i);
                out.add(pa, pb, &(&c * &Poly::var(pi.clone())).scale(&q(1, 2)));
            }
        }
        out.add(pa, &side[a], &Poly::one());
    }
    out
}

fn euler_field(dual: &DualDVB, field: usize) -> Result<BTreeMap<Var, Poly>> {
    dual.presentation
        .vars()
        .into_iter()
        .map(|v| {
            let w = dual.presentation.weight(&v)?[field];
            Ok((v.clone(), Poly::var(v).scale(&qi(w as i64))))
        })
        .collect()
}

fn renamed(v: &Var, prefix: &str) -> Var {
    Var::new(VarKind::Fibre, name(&format!("{prefix}{}", v.name)), v.lift, v.index)
}

/// `Lambda` built from the algebroid brackets, compared with its closed form,
/// with `[Lambda, Lambda] = 0`, the weight equations `L_{Delta^j} Lambda =
/// -j Lambda`, and the transport of the reduced canonical tensor on the dual
/// of the linearisation to `D*_B`.
pub fn poisson(s: &SymmetricVB, alg: &Algebroid) -> Result<PoissonTensor> {
    let dc = require_double(&s.d)?;
    let dual = dual_dvb(&s.d, Leg::A)?;
    let mut r = Report::new();
    let frame = alg.frame();
    let fibre: Vec<Var> = alg.frame_e.iter().chain(&alg.frame_f).cloned().collect();
    let duals: Vec<Var> = fibre.iter().map(|v| dual.dual_of(v).cloned().ok_or_else(|| Error::Unknown(v.to_string()))).collect::<Result<_>>()?;
    let mut lambda = Bivector::new();
    for (i, si) in frame.iter().enumerate() {
        for (j, sj) in frame.iter().enumerate().skip(i + 1) {
            lambda.add(&duals[i], &duals[j], &linear_function(alg, &dual, &alg.bracket(si, sj))?);
        }
        for y in &alg.side {
            lambda.add(&duals[i], y, &alg.anchor(si, &Poly::var(y.clone())));
        }
    }
    let ne = alg.frame_e.len();
    let (side_duals, core_duals) = duals.split_at(ne);
    let closed = closed_form(&|a, b, i| alg.sigma(a, b, i), side_duals, core_duals, &alg.side);
    let same = lambda == closed;
    r.push("closed-form", same, if same { "Lambda = 1/2 sigma_ab p_i dp_a ∧ dp_b + dp_a ∧ dy01_a".into() } else { format!("brackets give {}", lambda.describe()) });

    let sch = lambda.schouten();
    r.push("schouten", sch.is_empty(), sch.first().map(|(u, v, w, p)| format!("cyclic sum at ({u}, {v}, {w}) is {p}")).unwrap_or_else(|| "[Lambda, Lambda] = 0".into()));
    for (field, expect) in [(0usize, -1i64), (1, -2)] {
        let x = euler_field(&dual, field)?;
        let lie = lambda.lie_derivative(&x);
        let diff = lie.sub(&lambda.scale(&qi(expect)));
        r.push(
            format!("weight{}", field + 1),
            diff.is_zero(),
            if diff.is_zero() { format!("L_Delta{} Lambda = {expect} Lambda", field + 1) } else { format!("L_Delta{} Lambda - ({expect}) Lambda = {}", field + 1, diff.describe()) },
        );
    }

    // transport to D*_B from the dual of the linearisation, coordinates
    // (x, y10, pi01, pi11) with the reduced canonical tensor dpi ∧ dy10
    let db = dual_dvb(&s.d, Leg::B)?;
    let q01: Vec<Var> = dc.side01.iter().map(|v| db.dual_of(v).cloned().expect("dual")).collect();
    let q11: Vec<Var> = dc.core.iter().map(|v| db.dual_of(v).cloned().expect("dual")).collect();
    let pi01: Vec<Var> = dc.side01.iter().map(|v| renamed(v, "pi")).collect();
    let pi11: Vec<Var> = dc.core.iter().map(|v| renamed(v, "pi")).collect();
    let mut canonical = Bivector::new();
    for (p, y) in pi01.iter().zip(&dc.side10) {
        canonical.add(p, y, &Poly::one());
    }
    let half = q(1, 2);
    let shift = |sign: bool| -> (BTreeMap<Var, Poly>, BTreeMap<Var, Poly>) {
        // q01_a <- pi01_a + 1/2 y10^b s_ba pi11_i, s = sigma or its transpose
        let mut pull = BTreeMap::new();
        let mut inv = BTreeMap::new();
        for (a, qa) in q01.iter().enumerate() {
            let mut extra = Poly::zero();
            let mut extra_inv = Poly::zero();
            for (b, yb) in dc.side10.iter().enumerate() {
                for i in 0..q11.len() {
                    let c = if sign { alg.sigma(b, a, i) } else { alg.sigma(a, b, i) };
                    let t = &Poly::var(yb.clone()) * &c;
                    extra = &extra + &(&t * &Poly::var(pi11[i].clone())).scale(&half);
                    extra_inv = &extra_inv + &(&t * &Poly::var(q11[i].clone())).scale(&half);
                }
            }
            pull.insert(qa.clone(), &Poly::var(pi01[a].clone()) + &extra);
            inv.insert(pi01[a].clone(), &Poly::var(qa.clone()) - &extra_inv);
        }
        for (qi_, pi) in q11.iter().zip(&pi11) {
            pull.insert(qi_.clone(), Poly::var(pi.clone()));
            inv.insert(pi.clone(), Poly::var(qi_.clone()));
        }
        for y in &dc.side10 {
            pull.insert(y.clone(), Poly::var(y.clone()));
            inv.insert(y.clone(), Poly::var(y.clone()));
        }
        (pull, inv)
    };
    let printed = shift(true);
    let pushed = canonical.pushforward(&printed.0, &printed.1)?;
    let target = closed_form(&|a, b, i| alg.sigma(a, b, i), &q01, &q11, &dc.side10);
    let ok = pushed == target;
    r.push("transport", ok, if ok { "pushforward equals 1/2 sigma_ab q_i dq_a ∧ dq_b + dq_a ∧ dy10_a".into() } else { format!("pushforward is {}", pushed.describe()) });

    // the dual of I itself, read off the round-trip isomorphism
    let rt = roundtrip_iso(s)?;
    let iso = &rt.iso.chart(&alg.chart).ok_or_else(|| Error::Unknown(alg.chart.to_string()))?.pullback;
    let params: BTreeSet<Var> = dc.side10.iter().cloned().collect();
    let fib_b: Vec<Var> = dc.side01.iter().chain(&dc.core).cloned().collect();
    let pis: Vec<Var> = pi01.iter().chain(&pi11).cloned().collect();
    let qs: Vec<Var> = q01.iter().chain(&q11).cloned().collect();
    let mut pull = BTreeMap::new();
    for (u, qu) in fib_b.iter().zip(&qs) {
        let p: Poly = fib_b.iter().zip(&pis).map(|(f, pf)| &coefficient_of(&iso[f], u, &params) * &Poly::var(pf.clone())).sum();
        pull.insert(qu.clone(), p);
    }
    for y in &dc.side10 {
        pull.insert(y.clone(), Poly::var(y.clone()));
    }
    let exact = shift(false);
    let matches_shift = pull == exact.0;
    r.push("dual-of-I", matches_shift, if matches_shift { "dual of I: q01_a = pi01_a + 1/2 y10^b sigma_ab pi11" } else { "dual of I has an unexpected form" });
    if matches_shift {
        let pushed = canonical.pushforward(&exact.0, &exact.1)?;
        let leg_b = closed_form(&|a, b, i| alg.sigma(b, a, i), &q01, &q11, &dc.side10);
        let ok = pushed == leg_b;
        r.push("transport-dual-of-I", ok, if ok { "pushforward by the dual of I is the B-leg tensor, sigma transposed".into() } else { format!("pushforward is {}", pushed.describe()) });
        if printed.0 != exact.0 {
            r.warn("the shift q01_a = pi01_a + 1/2 y10^b sigma_ba pi11 is the dual of I only up to transposing sigma");
        }
    }
    Ok(PoissonTensor { dual, lambda, report: r })
}
