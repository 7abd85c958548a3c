//! Deterministic rational instances of the opaque coefficient functions.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::cell::RefCell;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::presentation::{FnDecl, Presentation, Transition};
use crate::error::{Error, Result};
use crate::graded_algebra::linalg::{self, Matrix};
use crate::graded_algebra::{q, FnSym, Label, Monomial, Name, Poly, Var, VarKind, Q};

pub const DEFAULT_SAMPLES: usize = 20;
pub const DEFAULT_DEGREE_CAP: u32 = 2;
pub const COEFF_BOUND: i64 = 7;

fn fnv(seed: u64, key: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in key.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub fn rng_for(seed: u64, key: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(fnv(seed, key))
}

pub fn small_rational(rng: &mut impl Rng) -> Q {
    q(rng.gen_range(-COEFF_BOUND..=COEFF_BOUND), rng.gen_range(1..=3))
}

pub fn nonzero_rational(rng: &mut impl Rng) -> Q {
    loop {
        let x = small_rational(rng);
        if !x.is_zero() {
            return x;
        }
    }
}

pub fn random_point(vars: impl IntoIterator<Item = Var>, rng: &mut impl Rng) -> BTreeMap<Var, Q> {
    vars.into_iter().map(|v| (v, small_rational(rng))).collect()
}

/// Evaluation of every coefficient function as an explicit polynomial in the
/// base coordinates. Entries are generated lazily from a per-entry seed, so
/// values do not depend on query order.
pub struct NumericInstance {
    seed: u64,
    cap: u32,
    decls: BTreeMap<Name, FnDecl>,
    block_sizes: BTreeMap<Name, u32>,
    base_blocks: BTreeMap<Name, u32>,
    base_vars: Vec<Var>,
    cache: RefCell<BTreeMap<FnSym, Poly>>,
}

impl NumericInstance {
    pub fn new(presentations: &[&Presentation], seed: u64, cap: u32) -> NumericInstance {
        let mut decls = BTreeMap::new();
        let mut block_sizes = BTreeMap::new();
        let mut base_blocks = BTreeMap::new();
        let mut base_vars = Vec::new();
        for p in presentations {
            for d in &p.fns {
                decls.entry(d.name.clone()).or_insert_with(|| d.clone());
            }
            for b in &p.blocks {
                block_sizes.entry(b.name.clone()).or_insert(b.size);
                if b.kind == VarKind::Base && !base_blocks.contains_key(&b.name) {
                    base_blocks.insert(b.name.clone(), b.size);
                    base_vars.extend(b.vars());
                }
            }
        }
        // index slots may name blocks that a functor removed, such as the core of a dual
        let mut seen: BTreeMap<Name, u32> = BTreeMap::new();
        for p in presentations {
            for l in p.transitions.iter().flat_map(|t| t.laws.values()) {
                for f in l.fns() {
                    for lab in f.lower.iter().chain(&f.upper) {
                        let e = seen.entry(lab.name.clone()).or_insert(0);
                        *e = (*e).max(lab.index);
                    }
                }
            }
        }
        for (n, size) in seen {
            block_sizes.entry(n).or_insert(size);
        }
        NumericInstance { seed, cap, decls, block_sizes, base_blocks, base_vars, cache: RefCell::new(BTreeMap::new()) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn base_vars(&self) -> &[Var] {
        &self.base_vars
    }

    fn is_invertible(&self, n: &Name) -> bool {
        self.decls.get(n).is_some_and(|d| d.invertible || d.inverse.is_some())
            || self.decls.values().any(|d| d.inverse.as_ref() == Some(n))
    }

    /// Name of the partner symbol and whether `n` is the generated side of the pair.
    fn pair(&self, n: &Name) -> Option<(Name, bool)> {
        let partner = self
            .decls
            .get(n)
            .and_then(|d| d.inverse.clone())
            .or_else(|| self.decls.values().find(|d| d.inverse.as_ref() == Some(n)).map(|d| d.name.clone()))?;
        Some((partner.clone(), **n <= *partner))
    }

    fn random_poly(&self, key: &str) -> Poly {
        let mut rng = rng_for(self.seed, key);
        let mut monos: Vec<Monomial> = alloc::vec![Monomial::one()];
        let mut frontier = monos.clone();
        for _ in 0..self.cap {
            let mut next = Vec::new();
            for m in &frontier {
                for v in &self.base_vars {
                    let n = m.mul(&Monomial::var(v.clone()));
                    if !next.contains(&n) && !monos.contains(&n) {
                        next.push(n);
                    }
                }
            }
            monos.extend(next.iter().cloned());
            frontier = next;
        }
        let mut p = Poly::zero();
        for m in monos {
            p.add_term(m, small_rational(&mut rng));
        }
        if p.is_zero() {
            p = Poly::one();
        }
        p
    }

    fn random_invertible(&self, key: &str, n: usize) -> Matrix {
        let mut rng = rng_for(self.seed, key);
        let mut l: Matrix = (0..n).map(|_| alloc::vec![Q::zero(); n]).collect();
        let mut u = l.clone();
        for i in 0..n {
            for j in 0..n {
                if i > j {
                    l[i][j] = small_rational(&mut rng);
                } else if i == j {
                    l[i][j] = Q::one();
                    u[i][j] = nonzero_rational(&mut rng);
                } else {
                    u[i][j] = small_rational(&mut rng);
                }
            }
        }
        linalg::mul(&l, &u)
    }

    /// Components of a triangular polynomial automorphism of the base block
    /// and its exact inverse.
    fn base_automorphism(&self, key: &str, block: &Name) -> (Vec<Poly>, Vec<Poly>) {
        let size = self.base_blocks[block] as usize;
        let xs: Vec<Var> = (1..=size as u32).map(|i| Var::new(VarKind::Base, block.clone(), Default::default(), i)).collect();
        let mut rng = rng_for(self.seed, key);
        let mut forward = Vec::new();
        let mut shifts = Vec::new();
        let mut scales = Vec::new();
        for a in 0..size {
            let c = nonzero_rational(&mut rng);
            let mut shift = Poly::constant(small_rational(&mut rng));
            for b in a + 1..size {
                shift = &shift + &Poly::var(xs[b].clone()).scale(&small_rational(&mut rng));
                if self.cap >= 2 {
                    shift = &shift + &Poly::var(xs[b].clone()).pow(2).scale(&small_rational(&mut rng));
                }
            }
            forward.push(&Poly::var(xs[a].clone()).scale(&c) + &shift);
            shifts.push(shift);
            scales.push(c);
        }
        let mut inverse: Vec<Poly> = alloc::vec![Poly::zero(); size];
        for a in (0..size).rev() {
            let map: BTreeMap<Var, Poly> = (a + 1..size).map(|b| (xs[b].clone(), inverse[b].clone())).collect();
            let shifted = shifts[a].substitute(&map).expect("base polynomials carry no symbols");
            inverse[a] = (&Poly::var(xs[a].clone()) - &shifted).scale(&(Q::one() / &scales[a]));
        }
        (forward, inverse)
    }

    fn entry(&self, f: &FnSym) -> Result<Poly> {
        if let Some(p) = self.cache.borrow().get(f) {
            return Ok(p.clone());
        }
        let p = if !f.deriv.is_empty() {
            let mut p = self.entry(&f.underived())?;
            for l in &f.deriv {
                p = p.formal_partial(&Var::new(VarKind::Base, l.name.clone(), Default::default(), l.index));
            }
            p
        } else {
            self.generate(f)?
        };
        self.cache.borrow_mut().insert(f.clone(), p.clone());
        Ok(p)
    }

    fn generate(&self, f: &FnSym) -> Result<Poly> {
        let invertible = self.is_invertible(&f.name);
        let size = |l: &Label| self.block_sizes.get(&l.name).copied().ok_or_else(|| Error::Unknown(l.name.to_string()));
        if invertible && f.lower.len() == 1 && f.upper.len() == 1 {
            let (lo, up) = (&f.lower[0], &f.upper[0]);
            if size(lo)? == size(up)? {
                let n = size(lo)? as usize;
                let (primary, inverted, plo, pup) = match self.pair(&f.name) {
                    Some((partner, false)) => (partner, true, up.name.clone(), lo.name.clone()),
                    _ => (f.name.clone(), false, lo.name.clone(), up.name.clone()),
                };
                let m = self.random_invertible(&format!("mat:{primary}:{plo}:{pup}"), n);
                let v = if inverted {
                    let inv = linalg::inverse(&m).expect("generated matrices are invertible");
                    inv[lo.index as usize - 1][up.index as usize - 1].clone()
                } else {
                    m[lo.index as usize - 1][up.index as usize - 1].clone()
                };
                return Ok(Poly::constant(v));
            }
        }
        if invertible && f.lower.is_empty() && f.upper.len() == 1 && self.base_blocks.contains_key(&f.upper[0].name) {
            let block = f.upper[0].name.clone();
            let (primary, inverted) = match self.pair(&f.name) {
                Some((partner, false)) => (partner, true),
                _ => (f.name.clone(), false),
            };
            let (fwd, inv) = self.base_automorphism(&format!("base:{primary}:{block}"), &block);
            let comps = if inverted { inv } else { fwd };
            return Ok(comps[f.upper[0].index as usize - 1].clone());
        }
        Ok(self.random_poly(&format!("fn:{f}")))
    }

    pub fn eval_fn(&self, f: &FnSym, point: &BTreeMap<Var, Q>) -> Result<Q> {
        self.entry(f)?.eval(point, &|_| Err(Error::Eval("nested symbol".into())))
    }

    pub fn eval(&self, p: &Poly, point: &BTreeMap<Var, Q>) -> Result<Q> {
        p.eval(point, &|f| self.eval_fn(f, point))
    }

    /// Evaluates the symbols at the base part of `point` and the listed
    /// coordinates, keeping the others symbolic.
    pub fn partial_eval(&self, p: &Poly, point: &BTreeMap<Var, Q>) -> Result<Poly> {
        p.partial_eval(point, &|f| self.eval_fn(f, point))
    }

    /// Image of a point under a transition.
    pub fn apply(&self, laws: &BTreeMap<Var, Poly>, point: &BTreeMap<Var, Q>) -> Result<BTreeMap<Var, Q>> {
        laws.iter().map(|(v, p)| Ok((v.clone(), self.eval(p, point)?))).collect()
    }

    pub fn apply_transition(&self, t: &Transition, point: &BTreeMap<Var, Q>) -> Result<BTreeMap<Var, Q>> {
        self.apply(&t.laws, point)
    }

    /// Jacobian of `laws` with respect to `vars`, evaluated at `point`.
    pub fn jacobian(&self, laws: &[Poly], vars: &[Var], point: &BTreeMap<Var, Q>) -> Result<Matrix> {
        laws.iter()
            .map(|p| vars.iter().map(|v| self.eval(&p.formal_partial(v), point)).collect())
            .collect()
    }
}

/// Standard seeded sample points for a presentation.
pub fn sample_points(p: &Presentation, seed: u64, samples: usize) -> Vec<BTreeMap<Var, Q>> {
    let mut rng = rng_for(seed, &format!("points:{}", p.name));
    (0..samples).map(|_| random_point(p.vars(), &mut rng)).collect()
}
