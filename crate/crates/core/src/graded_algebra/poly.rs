use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::symbol::{FnSym, Var};
use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn factorial(n: u32) -> Q {
    let mut f = BigInt::one();
    for i in 2..=n {
        f *= BigInt::from(i);
    }
    Q::from_integer(f)
}

/// Product of coordinate powers and coefficient-function powers. Both lists
/// are sorted and carry positive exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial {
    pub vars: Vec<(Var, u32)>,
    pub fns: Vec<(FnSym, u32)>,
}

fn merge<K: Ord + Clone>(a: &[(K, u32)], b: &[(K, u32)]) -> Vec<(K, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            core::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn var(v: Var) -> Monomial {
        Monomial { vars: alloc::vec![(v, 1)], fns: Vec::new() }
    }

    pub fn fnsym(f: FnSym) -> Monomial {
        Monomial { vars: Vec::new(), fns: alloc::vec![(f, 1)] }
    }

    pub fn from_vars(vs: impl IntoIterator<Item = Var>) -> Monomial {
        let mut m = Monomial::one();
        for v in vs {
            m = m.mul(&Monomial::var(v));
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.vars.is_empty() && self.fns.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial { vars: merge(&self.vars, &other.vars), fns: merge(&self.fns, &other.fns) }
    }

    pub fn exponent(&self, v: &Var) -> u32 {
        self.vars.binary_search_by(|(w, _)| w.cmp(v)).map(|i| self.vars[i].1).unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.vars.iter().map(|(_, e)| e).sum()
    }

    pub fn degree_where(&self, pred: impl Fn(&Var) -> bool) -> u32 {
        self.vars.iter().filter(|(v, _)| pred(v)).map(|(_, e)| e).sum()
    }

    /// Removes one factor of `v`; `None` when `v` does not divide.
    pub fn divide_var(&self, v: &Var) -> Option<(Monomial, u32)> {
        let i = self.vars.binary_search_by(|(w, _)| w.cmp(v)).ok()?;
        let e = self.vars[i].1;
        let mut vars = self.vars.clone();
        if e == 1 {
            vars.remove(i);
        } else {
            vars[i].1 -= 1;
        }
        Some((Monomial { vars, fns: self.fns.clone() }, e))
    }

    /// Additive weight under a per-coordinate weight; coefficient functions
    /// have weight zero.
    pub fn weight(&self, w: &impl Fn(&Var) -> i64) -> i64 {
        self.vars.iter().map(|(v, e)| w(v) * *e as i64).sum()
    }

    pub fn map_vars(&self, f: &impl Fn(&Var) -> Var) -> Monomial {
        let mut m = Monomial { vars: Vec::new(), fns: self.fns.clone() };
        for (v, e) in &self.vars {
            let mut vars: Vec<(Var, u32)> = alloc::vec![(f(v), *e)];
            vars = merge(&m.vars, &vars);
            m.vars = vars;
        }
        m
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_monomial(&mut s, self, 0)?;
        f.write_str(&s)
    }
}

pub fn write_monomial(out: &mut impl fmt::Write, m: &Monomial, depth: usize) -> fmt::Result {
    if m.is_one() {
        return out.write_str("1");
    }
    let mut first = true;
    for (v, e) in &m.vars {
        if !first {
            out.write_char('*')?;
        }
        first = false;
        v.write_padded(out, depth)?;
        if *e > 1 {
            write!(out, "^{e}")?;
        }
    }
    for (g, e) in &m.fns {
        if !first {
            out.write_char('*')?;
        }
        first = false;
        write!(out, "{g}")?;
        if *e > 1 {
            write!(out, "^{e}")?;
        }
    }
    Ok(())
}

/// Sparse polynomial with exact rational coefficients; zero coefficients are
/// never stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

/// Result of a homogeneity test.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum WeightCheck {
    Zero,
    Homogeneous(i64),
    Inhomogeneous(Vec<(Monomial, i64)>),
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Poly {
        Poly::term(Monomial::one(), c)
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(qi(n))
    }

    pub fn term(m: Monomial, c: Q) -> Poly {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn var(v: Var) -> Poly {
        Poly::term(Monomial::var(v), Q::one())
    }

    pub fn fnsym(f: FnSym) -> Poly {
        Poly::term(Monomial::fnsym(f), Q::one())
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Poly, c: &Q) {
        for (m, d) in &other.terms {
            self.add_term(m.clone(), d * c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Q)> {
        self.terms.into_iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    /// The constant value, if the polynomial has no coordinate or symbol factors.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        if c.is_one() && m.fns.is_empty() && m.vars.len() == 1 && m.vars[0].1 == 1 {
            Some(&m.vars[0].0)
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Q) -> Poly {
        let mut out = Poly::zero();
        for (n, d) in &self.terms {
            out.add_term(n.mul(m), d * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars.iter().map(|(v, _)| v.clone())).collect()
    }

    pub fn fns(&self) -> BTreeSet<FnSym> {
        self.terms.keys().flat_map(|m| m.fns.iter().map(|(f, _)| f.clone())).collect()
    }

    pub fn has_fns(&self) -> bool {
        self.terms.keys().any(|m| !m.fns.is_empty())
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    /// Formal derivative. Coefficient functions depend on the base point only,
    /// so differentiating by a base coordinate adds a derivative slot.
    pub fn formal_partial(&self, v: &Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if let Some((rest, e)) = m.divide_var(v) {
                out.add_term(rest, c * qi(e as i64));
            }
            if v.is_base() {
                for (i, (f, e)) in m.fns.iter().enumerate() {
                    let mut fns = m.fns.clone();
                    if *e == 1 {
                        fns.remove(i);
                    } else {
                        fns[i].1 -= 1;
                    }
                    let rest = Monomial { vars: m.vars.clone(), fns };
                    let df = Monomial::fnsym(f.differentiated(v.label()));
                    out.add_term(rest.mul(&df), c * qi(*e as i64));
                }
            }
        }
        out
    }

    /// Substitutes polynomials for coordinates; coordinates absent from the
    /// map are kept. Fails if a base coordinate would change underneath an
    /// opaque coefficient function.
    pub fn substitute(&self, map: &BTreeMap<Var, Poly>) -> Result<Poly> {
        let moved_base: Option<&Var> = map
            .iter()
            .find(|(v, p)| v.is_base() && p.as_var() != Some(*v))
            .map(|(v, _)| v);
        let mut cache: BTreeMap<(Var, u32), Poly> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if !m.fns.is_empty() {
                if let Some(b) = moved_base {
                    return Err(Error::OpaqueComposition(b.to_string()));
                }
            }
            let mut acc = Poly::term(Monomial { vars: Vec::new(), fns: m.fns.clone() }, c.clone());
            for (v, e) in &m.vars {
                match map.get(v) {
                    None => acc = acc.mul_monomial(&Monomial { vars: alloc::vec![(v.clone(), *e)], fns: Vec::new() }, &Q::one()),
                    Some(img) => {
                        let key = (v.clone(), *e);
                        if !cache.contains_key(&key) {
                            cache.insert(key.clone(), img.pow(*e));
                        }
                        acc = &acc * &cache[&key];
                    }
                }
                if acc.is_zero() {
                    break;
                }
            }
            out.add_scaled(&acc, &Q::one());
        }
        Ok(out)
    }

    /// Drops every monomial containing a coordinate selected by `zeroed`.
    pub fn restrict_zero(&self, zeroed: impl Fn(&Var) -> bool) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !m.vars.iter().any(|(v, _)| zeroed(v)))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn filter_terms(&self, keep: impl Fn(&Monomial) -> bool) -> Poly {
        Poly { terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    pub fn rename(&self, f: impl Fn(&Var) -> Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.map_vars(&f), c.clone());
        }
        out
    }

    pub fn map_fns(&self, f: impl Fn(&FnSym) -> FnSym) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut n = Monomial { vars: m.vars.clone(), fns: Vec::new() };
            for (g, e) in &m.fns {
                n = n.mul(&Monomial { vars: Vec::new(), fns: alloc::vec![(f(g), *e)] });
            }
            out.add_term(n, c.clone());
        }
        out
    }

    pub fn weight_check(&self, w: impl Fn(&Var) -> i64) -> WeightCheck {
        let mut seen: Option<i64> = None;
        let mut all = Vec::new();
        let mut mixed = false;
        for m in self.terms.keys() {
            let d = m.weight(&w);
            all.push((m.clone(), d));
            match seen {
                None => seen = Some(d),
                Some(s) if s != d => mixed = true,
                _ => {}
            }
        }
        match (seen, mixed) {
            (None, _) => WeightCheck::Zero,
            (Some(d), false) => WeightCheck::Homogeneous(d),
            (Some(_), true) => WeightCheck::Inhomogeneous(all),
        }
    }

    pub fn is_homogeneous_of(&self, w: impl Fn(&Var) -> i64, d: i64) -> bool {
        self.terms.keys().all(|m| m.weight(&w) == d)
    }

    /// Numeric value at a point. Every coordinate must be assigned.
    pub fn eval(&self, point: &BTreeMap<Var, Q>, fns: &impl Fn(&FnSym) -> Result<Q>) -> Result<Q> {
        let mut total = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in &m.vars {
                let x = point.get(v).ok_or_else(|| Error::Eval(format!("no value for {v}")))?;
                t *= pow_q(x, *e);
            }
            for (f, e) in &m.fns {
                t *= pow_q(&fns(f)?, *e);
            }
            total += t;
        }
        Ok(total)
    }

    /// Evaluates every coefficient function and the coordinates present in
    /// `point`, leaving the rest symbolic.
    pub fn partial_eval(&self, point: &BTreeMap<Var, Q>, fns: &impl Fn(&FnSym) -> Result<Q>) -> Result<Poly> {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            let mut rest = Monomial::one();
            for (v, e) in &m.vars {
                match point.get(v) {
                    Some(x) => t *= pow_q(x, *e),
                    None => rest = rest.mul(&Monomial { vars: alloc::vec![(v.clone(), *e)], fns: Vec::new() }),
                }
            }
            for (f, e) in &m.fns {
                t *= pow_q(&fns(f)?, *e);
            }
            out.add_term(rest, t);
        }
        Ok(out)
    }

    pub fn write_padded(&self, out: &mut impl fmt::Write, depth: usize) -> fmt::Result {
        if self.terms.is_empty() {
            return out.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.write_str("-")?;
                }
            } else {
                out.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                write!(out, "{a}")?;
            } else {
                if !a.is_one() {
                    write!(out, "{a}*")?;
                }
                write_monomial(out, m, depth)?;
            }
        }
        Ok(())
    }
}

pub fn pow_q(x: &Q, e: u32) -> Q {
    let mut acc = Q::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_padded(&mut s, 0)?;
        f.write_str(&s)
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_scaled(rhs, &Q::one());
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Q::one());
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (n, d) in &rhs.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Q::one())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl core::iter::Sum for Poly {
    fn sum<I: Iterator<Item = Poly>>(iter: I) -> Poly {
        let mut acc = Poly::zero();
        for p in iter {
            acc.add_scaled(&p, &Q::one());
        }
        acc
    }
}

impl From<Var> for Poly {
    fn from(v: Var) -> Poly {
        Poly::var(v)
    }
}
