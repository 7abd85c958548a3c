use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::{require_double, sigma_coefficients};
use crate::bundle_model::numeric::{rng_for, small_rational};
use crate::error::{Error, Result};
use crate::graded_algebra::{Name, Poly, Var};
use crate::report::Report;
use crate::symmetric::{roundtrip_iso, SymmetricVB};

/// A section `e^a e_a + f^i f_i` of `D -> A` with coefficients depending on
/// the base and the `(0,1)` side coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub e: Vec<Poly>,
    pub f: Vec<Poly>,
}

impl Section {
    fn zero(r: usize, c: usize) -> Section {
        Section { e: alloc::vec![Poly::zero(); r], f: alloc::vec![Poly::zero(); c] }
    }

    fn scale_by(&self, h: &Poly) -> Section {
        Section { e: self.e.iter().map(|p| p * h).collect(), f: self.f.iter().map(|p| p * h).collect() }
    }

    fn add(&self, o: &Section) -> Section {
        Section { e: self.e.iter().zip(&o.e).map(|(a, b)| a + b).collect(), f: self.f.iter().zip(&o.f).map(|(a, b)| a + b).collect() }
    }

    fn sub(&self, o: &Section) -> Section {
        Section { e: self.e.iter().zip(&o.e).map(|(a, b)| a - b).collect(), f: self.f.iter().zip(&o.f).map(|(a, b)| a - b).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().chain(&self.f).all(Poly::is_zero)
    }
}

/// Lie algebroid on `D -> A` in the frame `(e_a, f_i)` dual to
/// `(y10^a, z^i)`: `[e_a, e_b] = sigma^i_ab f_i`, `rho(e_a) = d/dy01^a`.
#[derive(Clone, Debug)]
pub struct Algebroid {
    pub chart: Name,
    /// Coordinates of `A` along the fibre of `A -> M`.
    pub side: Vec<Var>,
    pub frame_e: Vec<Var>,
    pub frame_f: Vec<Var>,
    /// `sigma^i_ab` keyed by `(a, b, i)`.
    pub sigma: BTreeMap<(usize, usize, usize), Poly>,
    pub report: Report,
}

impl Algebroid {
    pub fn e(&self, a: usize) -> Section {
        let mut s = Section::zero(self.frame_e.len(), self.frame_f.len());
        s.e[a] = Poly::one();
        s
    }

    pub fn f(&self, i: usize) -> Section {
        let mut s = Section::zero(self.frame_e.len(), self.frame_f.len());
        s.f[i] = Poly::one();
        s
    }

    pub fn sigma(&self, a: usize, b: usize, i: usize) -> Poly {
        self.sigma.get(&(a, b, i)).cloned().unwrap_or_default()
    }

    pub fn anchor(&self, s: &Section, h: &Poly) -> Poly {
        self.side.iter().zip(&s.e).map(|(y, c)| c * &h.formal_partial(y)).sum()
    }

    pub fn bracket(&self, s1: &Section, s2: &Section) -> Section {
        let mut out = Section::zero(self.frame_e.len(), self.frame_f.len());
        for (k, x) in out.e.iter_mut().enumerate() {
            *x = &self.anchor(s1, &s2.e[k]) - &self.anchor(s2, &s1.e[k]);
        }
        for (i, x) in out.f.iter_mut().enumerate() {
            let mut acc = &self.anchor(s1, &s2.f[i]) - &self.anchor(s2, &s1.f[i]);
            for (a, ea) in s1.e.iter().enumerate() {
                for (b, eb) in s2.e.iter().enumerate() {
                    let c = self.sigma(a, b, i);
                    if !c.is_zero() {
                        acc = &acc + &(&(ea * eb) * &c);
                    }
                }
            }
            *x = acc;
        }
        out
    }

    pub fn jacobiator(&self, a: &Section, b: &Section, c: &Section) -> Section {
        let t1 = self.bracket(&self.bracket(a, b), c);
        let t2 = self.bracket(&self.bracket(b, c), a);
        let t3 = self.bracket(&self.bracket(c, a), b);
        t1.add(&t2).add(&t3)
    }

    /// All frame sections, `e_a` first.
    pub fn frame(&self) -> Vec<Section> {
        (0..self.frame_e.len()).map(|a| self.e(a)).chain((0..self.frame_f.len()).map(|i| self.f(i))).collect()
    }
}

fn random_poly(vars: &[Var], rng: &mut impl Rng) -> Poly {
    let mut p = Poly::constant(small_rational(rng));
    for (i, u) in vars.iter().enumerate() {
        if rng.gen_bool(0.5) {
            p = &p + &Poly::var(u.clone()).scale(&small_rational(rng));
        }
        for w in &vars[i..] {
            if rng.gen_bool(0.3) {
                p = &p + &(Poly::var(u.clone()) * Poly::var(w.clone())).scale(&small_rational(rng));
            }
        }
    }
    p
}

fn random_section(alg: &Algebroid, vars: &[Var], rng: &mut impl Rng) -> Section {
    Section { e: alg.frame_e.iter().map(|_| random_poly(vars, rng)).collect(), f: alg.frame_f.iter().map(|_| random_poly(vars, rng)).collect() }
}

/// Bracket of sections computed as the Lie bracket of vertical vector fields
/// `Ydot^a d/dY^a + Zdot^i d/dZ^i` on the diagonal, after transporting the
/// sections by the round-trip isomorphism `I`.
struct VectorFields {
    side: Vec<Var>,
    frame_e: Vec<Var>,
    frame_f: Vec<Var>,
    iso: BTreeMap<Var, Poly>,
    inverse: BTreeMap<Var, Poly>,
}

impl VectorFields {
    fn transport(&self, map: &BTreeMap<Var, Poly>, s: &Section) -> Result<Section> {
        let subs: BTreeMap<Var, Poly> = self.frame_e.iter().cloned().zip(s.e.iter().cloned()).chain(self.frame_f.iter().cloned().zip(s.f.iter().cloned())).collect();
        Ok(Section {
            e: self.frame_e.iter().map(|v| map[v].substitute(&subs)).collect::<Result<_>>()?,
            f: self.frame_f.iter().map(|v| map[v].substitute(&subs)).collect::<Result<_>>()?,
        })
    }

    fn apply(&self, v: &Section, h: &Poly) -> Poly {
        self.side.iter().zip(&v.e).map(|(y, c)| c * &h.formal_partial(y)).sum()
    }

    fn bracket(&self, s1: &Section, s2: &Section) -> Result<Section> {
        let v1 = self.transport(&self.iso, s1)?;
        let v2 = self.transport(&self.iso, s2)?;
        let comp = |a: &Poly, b: &Poly| &self.apply(&v1, b) - &self.apply(&v2, a);
        let lie = Section { e: v1.e.iter().zip(&v2.e).map(|(a, b)| comp(a, b)).collect(), f: v1.f.iter().zip(&v2.f).map(|(a, b)| comp(a, b)).collect() };
        self.transport(&self.inverse, &lie)
    }
}

/// The algebroid on `D -> A` for one chart, with exact checks of skew
/// symmetry, the Jacobi identity and the Leibniz rule on the frame and on
/// random polynomial sections, and a comparison with the vector field route.
pub fn algebroid(s: &SymmetricVB, chart: &str, seed: u64, samples: usize) -> Result<Algebroid> {
    let dc = require_double(&s.d)?;
    let sigma = sigma_coefficients(s, chart)?;
    let mut alg = Algebroid { chart: crate::graded_algebra::name(chart), side: dc.side01.clone(), frame_e: dc.side10.clone(), frame_f: dc.core.clone(), sigma, report: Report::new() };
    let mut r = Report::new();
    let (ne, nf) = (alg.frame_e.len(), alg.frame_f.len());

    let mut skew = true;
    for a in 0..ne {
        for b in 0..ne {
            for i in 0..nf {
                skew &= (&alg.sigma(a, b, i) + &alg.sigma(b, a, i)).is_zero();
            }
        }
    }
    r.push("skew", skew, if skew { "sigma^i_ab = -sigma^i_ba" } else { "bracket coefficients not skew" });

    let mut frame_ok = true;
    for a in 0..ne {
        for i in 0..nf {
            frame_ok &= alg.bracket(&alg.e(a), &alg.f(i)).is_zero();
            frame_ok &= alg.anchor(&alg.f(i), &Poly::var(alg.side[a].clone())).is_zero();
        }
        for c in 0..ne {
            let expect = if a == c { Poly::one() } else { Poly::zero() };
            frame_ok &= alg.anchor(&alg.e(a), &Poly::var(alg.side[c].clone())) == expect;
        }
    }
    for i in 0..nf {
        for j in 0..nf {
            frame_ok &= alg.bracket(&alg.f(i), &alg.f(j)).is_zero();
        }
    }
    r.push("frame", frame_ok, if frame_ok { "[e,f] = 0 = [f,f], rho(e_a) = d/dy01^a, rho(f) = 0" } else { "frame relations fail" });

    let mut vars: Vec<Var> = s.d.base_vars();
    vars.extend(alg.side.iter().cloned());
    let mut rng = rng_for(seed, &format!("algebroid:{chart}"));
    let frame = alg.frame();
    let mut sections = frame.clone();
    let extra = samples.clamp(1, 6);
    for _ in 0..extra {
        sections.push(random_section(&alg, &vars, &mut rng));
    }

    let mut jac: Option<alloc::string::String> = None;
    'j: for (i, a) in frame.iter().enumerate() {
        for b in &frame[i + 1..] {
            for c in &frame {
                if !alg.jacobiator(a, b, c).is_zero() {
                    jac = Some("on the frame".into());
                    break 'j;
                }
            }
        }
    }
    let randoms = &sections[frame.len()..];
    if jac.is_none() {
        for w in randoms.windows(3) {
            if !alg.jacobiator(&w[0], &w[1], &w[2]).is_zero() {
                jac = Some("on random sections".into());
                break;
            }
        }
        if randoms.len() < 3 && !alg.jacobiator(&randoms[0], &frame[0], &randoms[randoms.len() - 1]).is_zero() {
            jac = Some("on random sections".into());
        }
    }
    r.push("jacobi", jac.is_none(), jac.map(|w| format!("Jacobiator nonzero {w}")).unwrap_or_else(|| format!("exact on the frame and {} random sections", randoms.len())));

    let mut leibniz = true;
    let mut hom = true;
    for w in sections.windows(2) {
        let h = random_poly(&vars, &mut rng);
        let lhs = alg.bracket(&w[0], &w[1].scale_by(&h));
        let rhs = alg.bracket(&w[0], &w[1]).scale_by(&h).add(&w[1].scale_by(&alg.anchor(&w[0], &h)));
        leibniz &= lhs.sub(&rhs).is_zero();
        let br = alg.bracket(&w[0], &w[1]);
        let lhs = alg.anchor(&br, &h);
        let rhs = &alg.anchor(&w[0], &alg.anchor(&w[1], &h)) - &alg.anchor(&w[1], &alg.anchor(&w[0], &h));
        hom &= lhs == rhs;
    }
    r.push("leibniz", leibniz, if leibniz { "[s1, h s2] = h [s1, s2] + rho(s1)(h) s2" } else { "Leibniz rule fails" });
    r.push("anchor-morphism", hom, if hom { "rho([s1, s2]) = [rho(s1), rho(s2)]" } else { "anchor is not a bracket morphism" });

    let rt = roundtrip_iso(s)?;
    let pick = |m: &crate::bundle_model::morphism::Morphism| -> Result<BTreeMap<Var, Poly>> {
        m.chart(chart).map(|c| c.pullback.clone()).ok_or_else(|| Error::Unknown(chart.into()))
    };
    let vf = VectorFields { side: alg.side.clone(), frame_e: alg.frame_e.clone(), frame_f: alg.frame_f.clone(), iso: pick(&rt.iso)?, inverse: pick(&rt.inverse)? };
    let mut agree = None;
    'v: for (i, a) in sections.iter().enumerate() {
        for b in &sections[i + 1..] {
            let via = vf.bracket(a, b)?;
            if via != alg.bracket(a, b) {
                agree = Some(format!("{:?} vs {:?}", via.f.iter().map(|p| format!("{p}")).collect::<Vec<_>>(), alg.bracket(a, b).f.iter().map(|p| format!("{p}")).collect::<Vec<_>>()));
                break 'v;
            }
        }
    }
    r.push("vector-fields", agree.is_none(), agree.map(|d| format!("brackets differ: {d}")).unwrap_or_else(|| "bracket agrees with vertical vector fields on the diagonal".into()));
    alg.report = r;
    Ok(alg)
}
