use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use super::{coefficient_of, require_double};
use crate::bundle_model::linear::{invert_block, linear_block};
use crate::bundle_model::numeric::{rng_for, small_rational, NumericInstance, DEFAULT_DEGREE_CAP};
use crate::bundle_model::{Block, Presentation, Transition};
use crate::error::{Error, Result};
use crate::graded_algebra::{Poly, Var, VarKind, Q};
use crate::report::Report;

/// Which leg the dual is taken over: `A` carries the `(0,1)` side
/// coordinates, so `D -> A` has fibre coordinates of weight `(1,*)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Leg {
    A,
    B,
}

impl Leg {
    /// The weight field along which `D -> leg` is linear.
    fn field(self) -> usize {
        match self {
            Leg::A => 0,
            Leg::B => 1,
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Leg::A => "p",
            Leg::B => "q",
        }
    }
}

/// `D*_A` or `D*_B` as a double vector bundle over the leg and `C*`.
#[derive(Clone, Debug)]
pub struct DualDVB {
    pub leg: Leg,
    pub presentation: Presentation,
    /// Dual coordinate and the fibre coordinate of `D` it is paired with.
    pub pairs: Vec<(Var, Var)>,
    /// Coordinates of the leg itself.
    pub side: Vec<Var>,
}

impl DualDVB {
    pub fn dual_of(&self, v: &Var) -> Option<&Var> {
        self.pairs.iter().find(|(_, u)| u == v).map(|(p, _)| p)
    }

    /// Dual coordinates paired with the core.
    pub fn core_duals(&self) -> Vec<Var> {
        self.pairs.iter().filter(|(_, u)| u.lift.count() == 2).map(|(p, _)| p.clone()).collect()
    }
}

fn dual_var(leg: Leg, v: &Var) -> Var {
    let name: String = format!("{}{}", leg.prefix(), v.name);
    Var::new(VarKind::Fibre, crate::graded_algebra::name(&name), v.lift, v.index)
}

/// Contragredient laws of the fibre coordinates of `D -> leg`. With
/// `(s', z') = L (s, z)`, `L = [[M, 0], [E, P]]` and `E` linear in the leg
/// coordinates, the duals transform by `L^{-T}`, whose off-diagonal block
/// `-M^{-T} E^T P^{-T}` is the affine shift induced by the quadratic term.
pub fn dual_dvb(d: &Presentation, leg: Leg) -> Result<DualDVB> {
    let dc = require_double(d)?;
    let (fib_side, side) = match leg {
        Leg::A => (dc.side10.clone(), dc.side01.clone()),
        Leg::B => (dc.side01.clone(), dc.side10.clone()),
    };
    let core = dc.core.clone();
    let params: BTreeSet<Var> = side.iter().cloned().collect();
    let mut blocks: Vec<Block> = d.blocks.iter().filter(|b| b.kind == VarKind::Base || b.weight[leg.field()] == 0).cloned().collect();
    for b in d.blocks.iter().filter(|b| b.kind == VarKind::Fibre && b.weight[leg.field()] == 1) {
        let mut weight = b.weight.clone();
        let other = 1 - leg.field();
        weight[other] = 1 - weight[other];
        blocks.push(Block::fibre(&format!("{}{}", leg.prefix(), b.name), b.lift, b.size, weight));
    }
    let fib: Vec<Var> = fib_side.iter().chain(&core).cloned().collect();
    let pairs: Vec<(Var, Var)> = fib.iter().map(|v| (dual_var(leg, v), v.clone())).collect();
    let mut transitions = Vec::new();
    for t in &d.transitions {
        let nm = invert_block(&linear_block(&t.laws, &fib_side, &fib_side), &fib_side, &fib_side, &d.fns)?;
        let np = invert_block(&linear_block(&t.laws, &core, &core), &core, &core, &d.fns)?;
        let e: Vec<Vec<Poly>> = fib_side.iter().map(|u| core.iter().map(|z| coefficient_of(&t.laws[z], u, &params)).collect()).collect();
        let mut laws: BTreeMap<Var, Poly> = t.laws.iter().filter(|(v, _)| v.is_base() || params.contains(v)).map(|(v, p)| (v.clone(), p.clone())).collect();
        for (f, fv) in fib_side.iter().enumerate() {
            let mut law = Poly::zero();
            for (u, uv) in fib_side.iter().enumerate() {
                law = &law + &(&nm[f][u] * &Poly::var(dual_var(leg, uv)));
            }
            for (i, iv) in core.iter().enumerate() {
                let mut off = Poly::zero();
                for u in 0..fib_side.len() {
                    if nm[f][u].is_zero() {
                        continue;
                    }
                    for j in 0..core.len() {
                        off = &off + &(&(&nm[f][u] * &e[u][j]) * &np[j][i]);
                    }
                }
                law = &law - &(&off * &Poly::var(dual_var(leg, iv)));
            }
            laws.insert(dual_var(leg, fv), law);
        }
        for (j, jv) in core.iter().enumerate() {
            let mut law = Poly::zero();
            for (i, iv) in core.iter().enumerate() {
                law = &law + &(&np[j][i] * &Poly::var(dual_var(leg, iv)));
            }
            laws.insert(dual_var(leg, jv), law);
        }
        transitions.push(Transition { laws, ..t.clone() });
    }
    let suffix = match leg {
        Leg::A => "A",
        Leg::B => "B",
    };
    let presentation = Presentation {
        name: format!("{}_dual{suffix}", d.name),
        degree: alloc::vec![1, 1],
        lift_depth: d.lift_depth,
        blocks,
        fns: d.fns.clone(),
        charts: d.charts.clone(),
        transitions,
    };
    Ok(DualDVB { leg, presentation, pairs, side })
}

fn contract(dual: &DualDVB, cov: &BTreeMap<Var, Q>, d: &BTreeMap<Var, Q>) -> Q {
    dual.pairs.iter().map(|(p, v)| cov.get(p).cloned().unwrap_or_default() * d.get(v).cloned().unwrap_or_default()).sum()
}

/// `<Phi, Psi> = Phi(d) - Psi(d)` for `Phi` in `D*_A`, `Psi` in `D*_B` over
/// the same point of `C*`, and `d` over their footpoints.
pub fn pairing(a: &DualDVB, b: &DualDVB, phi: &BTreeMap<Var, Q>, psi: &BTreeMap<Var, Q>, d: &BTreeMap<Var, Q>) -> Result<Q> {
    if a.leg != Leg::A || b.leg != Leg::B {
        return Err(Error::Invalid("pairing expects duals over A and over B".into()));
    }
    let mismatch = |what: &str, v: &Var| Error::Invalid(format!("footpoint mismatch in {what} at {v}"));
    for (v, x) in d.iter().filter(|(v, _)| v.is_base()) {
        if phi.get(v) != Some(x) || psi.get(v) != Some(x) {
            return Err(mismatch("the base", v));
        }
    }
    for v in &a.side {
        if phi.get(v) != d.get(v) {
            return Err(mismatch("A", v));
        }
    }
    for v in &b.side {
        if psi.get(v) != d.get(v) {
            return Err(mismatch("B", v));
        }
    }
    for (pa, pb) in a.core_duals().iter().zip(b.core_duals()) {
        if phi.get(pa) != psi.get(&pb) {
            return Err(mismatch("C*", pa));
        }
    }
    Ok(contract(a, phi, d) - contract(b, psi, d))
}

fn random_values(vars: &[Var], rng: &mut impl rand::Rng) -> BTreeMap<Var, Q> {
    vars.iter().map(|v| (v.clone(), small_rational(rng))).collect()
}

/// Numeric certificates for both duals: evaluation invariance under every
/// transition, `d`-independence of the pairing under core shifts, its
/// invariance under transitions, and vanishing on zero covectors.
pub fn pairing_report(d: &Presentation, a: &DualDVB, b: &DualDVB, seed: u64, samples: usize) -> Report {
    let mut r = Report::new();
    let inst = NumericInstance::new(&[d, &a.presentation, &b.presentation], seed, DEFAULT_DEGREE_CAP);
    let dvars = d.vars();
    let base = d.base_vars();
    let core: Vec<Var> = a.pairs.iter().filter(|(_, v)| v.lift.count() == 2).map(|(_, v)| v.clone()).collect();
    for dual in [a, b] {
        let name = match dual.leg {
            Leg::A => "dual-A",
            Leg::B => "dual-B",
        };
        let duals: Vec<Var> = dual.pairs.iter().map(|(p, _)| p.clone()).collect();
        let mut bad = None;
        'outer: for (t, dt) in d.transitions.iter().zip(&dual.presentation.transitions) {
            let mut rng = rng_for(seed, &format!("{name}:{}", t.label()));
            for _ in 0..samples {
                let mut pt = random_values(&dvars, &mut rng);
                pt.extend(random_values(&duals, &mut rng));
                let step = inst.apply_transition(t, &pt).and_then(|img| Ok((img, inst.apply_transition(dt, &pt)?)));
                match step {
                    Ok((img, dimg)) => {
                        let before = contract(dual, &pt, &pt);
                        let after = contract(dual, &dimg, &img);
                        if before != after {
                            bad = Some(format!("{}: pairing {before} becomes {after}", t.label()));
                            break 'outer;
                        }
                    }
                    Err(e) => {
                        bad = Some(format!("{}: {e}", t.label()));
                        break 'outer;
                    }
                }
            }
        }
        r.push(format!("{name}.evaluation"), bad.is_none(), bad.unwrap_or_else(|| format!("invariant at {samples} points per transition")));
    }
    let mut rng = rng_for(seed, "pairing");
    let mut bad = None;
    let mut zero_ok = true;
    for n in 0..samples {
        let mut dpt = random_values(&dvars, &mut rng);
        let mut phi: BTreeMap<Var, Q> = base.iter().chain(&a.side).map(|v| (v.clone(), dpt[v].clone())).collect();
        let mut psi: BTreeMap<Var, Q> = base.iter().chain(&b.side).map(|v| (v.clone(), dpt[v].clone())).collect();
        for (p, v) in &a.pairs {
            if v.lift.count() != 2 {
                phi.insert(p.clone(), small_rational(&mut rng));
            }
        }
        for (p, v) in &b.pairs {
            if v.lift.count() != 2 {
                psi.insert(p.clone(), small_rational(&mut rng));
            }
        }
        for (pa, pb) in a.core_duals().iter().zip(b.core_duals()) {
            let alpha = small_rational(&mut rng);
            phi.insert(pa.clone(), alpha.clone());
            psi.insert(pb, alpha);
        }
        let first = pairing(a, b, &phi, &psi, &dpt);
        for z in &core {
            *dpt.get_mut(z).expect("core coordinate") += small_rational(&mut rng);
        }
        let shifted = pairing(a, b, &phi, &psi, &dpt);
        match (&first, &shifted) {
            (Ok(x), Ok(y)) if x == y => {}
            _ => {
                bad = Some(format!("sample {n}: {first:?} vs {shifted:?} after a core shift"));
                break;
            }
        }
        if n == 0 {
            let zero = |m: &BTreeMap<Var, Q>, dual: &DualDVB| -> BTreeMap<Var, Q> {
                m.iter().map(|(v, x)| (v.clone(), if dual.pairs.iter().any(|(p, _)| p == v) { Q::zero() } else { x.clone() })).collect()
            };
            zero_ok = pairing(a, b, &zero(&phi, a), &zero(&psi, b), &dpt) == Ok(Q::zero());
        }
        for ((t, ta), tb) in d.transitions.iter().zip(&a.presentation.transitions).zip(&b.presentation.transitions) {
            let moved = (|| -> Result<Q> {
                let d2 = inst.apply_transition(t, &dpt)?;
                let mut full_a = dpt.clone();
                full_a.extend(phi.clone());
                let mut full_b = dpt.clone();
                full_b.extend(psi.clone());
                let phi2: BTreeMap<Var, Q> = inst.apply_transition(ta, &full_a)?;
                let psi2: BTreeMap<Var, Q> = inst.apply_transition(tb, &full_b)?;
                pairing(a, b, &phi2, &psi2, &d2)
            })();
            if moved.as_ref().ok() != shifted.as_ref().ok() {
                bad = Some(format!("sample {n}: pairing changes under {}: {moved:?} vs {shifted:?}", t.label()));
                break;
            }
        }
        if bad.is_some() {
            break;
        }
    }
    r.push("pairing.core-shift", bad.is_none(), bad.unwrap_or_else(|| format!("value independent of d and of the chart at {samples} points")));
    r.push("pairing.zero", zero_ok, if zero_ok { "zero covectors pair to 0" } else { "zero covectors pair to a nonzero value" });
    r
}
