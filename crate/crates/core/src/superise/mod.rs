//! Re-reading a k-fold vector bundle as a Z2^k-graded supermanifold.
//!
//! A coordinate of multi-weight `e` in `{0,1}^k` gets Z2^k-degree `e` and
//! Grassmann parity `|e| mod 2`. Two coordinates of degrees `e`, `d` commute
//! up to `(-1)^<e,d>`. The laws carry over verbatim exactly when no monomial
//! multiplies two coordinates that fail to commute strictly.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bundle_model::Presentation;
use crate::error::{Error, Result};
use crate::graded_algebra::{Poly, Var};
use crate::report::Report;

/// An element of Z2^k.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Z2kDegree {
    pub bits: Vec<u8>,
}

impl Z2kDegree {
    pub fn new(bits: Vec<u8>) -> Z2kDegree {
        Z2kDegree { bits: bits.into_iter().map(|b| b & 1).collect() }
    }

    /// Grassmann parity: the number of nonzero bits mod 2.
    pub fn parity(&self) -> u8 {
        self.bits.iter().fold(0, |acc, b| acc ^ b)
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == 1
    }

    /// Standard scalar product mod 2.
    pub fn dot(&self, other: &Z2kDegree) -> u8 {
        self.bits.iter().zip(&other.bits).fold(0, |acc, (a, b)| acc ^ (a & b))
    }

    /// `(-1)^<self, other>`.
    pub fn sign(&self, other: &Z2kDegree) -> i8 {
        if self.dot(other) == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }
}

impl core::fmt::Display for Z2kDegree {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("(")?;
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(")")
    }
}

/// Degree of every coordinate; fails unless all weights lie in `{0,1}^k`.
pub fn degrees(d: &Presentation) -> Result<BTreeMap<Var, Z2kDegree>> {
    let mut out = BTreeMap::new();
    for b in &d.blocks {
        if let Some(w) = b.weight.iter().find(|&&w| w > 1) {
            return Err(Error::Invalid(format!("block {} has weight {w}, not a k-fold vector bundle coordinate", b.name)));
        }
        let deg = Z2kDegree::new(b.weight.iter().map(|&w| w as u8).collect());
        for v in b.vars() {
            out.insert(v, deg.clone());
        }
    }
    Ok(out)
}

/// A monomial that multiplies two coordinates which do not commute strictly.
/// `pair.0 == pair.1` marks the square of an odd coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub transition: String,
    pub law: Var,
    pub monomial: String,
    pub pair: (Var, Var),
    pub degrees: (Z2kDegree, Z2kDegree),
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{}: law of {} has monomial {} pairing {} {} and {} {}",
            self.transition, self.law, self.monomial, self.pair.0, self.degrees.0, self.pair.1, self.degrees.1
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignCheck {
    pub violations: Vec<Violation>,
    pub report: Report,
}

fn scan(label: &str, law: &Var, p: &Poly, deg: &BTreeMap<Var, Z2kDegree>, out: &mut Vec<Violation>) {
    for (m, _) in p.terms() {
        let fibre: Vec<(&Var, u32, &Z2kDegree)> =
            m.vars.iter().filter_map(|(v, e)| deg.get(v).filter(|d| !d.is_zero()).map(|d| (v, *e, d))).collect();
        for (i, &(u, eu, du)) in fibre.iter().enumerate() {
            if eu >= 2 && du.is_odd() {
                out.push(Violation {
                    transition: label.to_string(),
                    law: law.clone(),
                    monomial: m.to_string(),
                    pair: (u.clone(), u.clone()),
                    degrees: (du.clone(), du.clone()),
                });
            }
            for &(v, _, dv) in &fibre[i + 1..] {
                if du.dot(dv) == 1 {
                    out.push(Violation {
                        transition: label.to_string(),
                        law: law.clone(),
                        monomial: m.to_string(),
                        pair: (u.clone(), v.clone()),
                        degrees: (du.clone(), dv.clone()),
                    });
                }
            }
        }
    }
}

/// Scans every monomial of every law for pairs of distinct fibre coordinates
/// of odd scalar product, and for squares of odd coordinates.
pub fn z2k_sign_check(d: &Presentation) -> Result<SignCheck> {
    let deg = degrees(d)?;
    let mut violations = Vec::new();
    let mut report = Report::new();
    for t in &d.transitions {
        let before = violations.len();
        for (v, p) in &t.laws {
            scan(&t.label(), v, p, &deg, &mut violations);
        }
        let found = violations.len() - before;
        report.push(
            format!("signs.{}", t.label()),
            found == 0,
            if found == 0 { "every co-occurring pair commutes".to_string() } else { violations[before].to_string() },
        );
    }
    if d.transitions.is_empty() {
        report.push("signs", true, "no transitions");
    }
    Ok(SignCheck { violations, report })
}

/// One row of the coordinate table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperCoordinate {
    pub var: Var,
    pub degree: Z2kDegree,
}

impl SuperCoordinate {
    pub fn is_odd(&self) -> bool {
        self.degree.is_odd()
    }
}

/// A certified re-tagging: laws unchanged, coordinates graded by Z2^k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Superisation {
    pub presentation: Presentation,
    pub coordinates: Vec<SuperCoordinate>,
    /// Distinct nonzero degrees occurring among the fibre coordinates.
    pub classes: Vec<Z2kDegree>,
    /// `signs[i][j] = (-1)^<classes[i], classes[j]>`.
    pub signs: Vec<Vec<i8>>,
    pub report: Report,
}

impl Superisation {
    pub fn degree_of(&self, v: &Var) -> Option<&Z2kDegree> {
        self.coordinates.iter().find(|c| &c.var == v).map(|c| &c.degree)
    }

    /// Sign picked up by swapping two coordinates.
    pub fn sign(&self, u: &Var, v: &Var) -> Option<i8> {
        Some(self.degree_of(u)?.sign(self.degree_of(v)?))
    }
}

/// Tags coordinates and emits the commutation table; refuses when the sign
/// check finds a monomial that would change meaning.
pub fn superise(d: &Presentation) -> Result<Superisation> {
    let check = z2k_sign_check(d)?;
    if let Some(v) = check.violations.first() {
        return Err(Error::Invalid(format!("not superisable ({} violations), first: {v}", check.violations.len())));
    }
    let deg = degrees(d)?;
    let coordinates: Vec<SuperCoordinate> =
        d.vars().into_iter().map(|v| SuperCoordinate { degree: deg[&v].clone(), var: v }).collect();
    let mut classes: Vec<Z2kDegree> = coordinates.iter().map(|c| c.degree.clone()).filter(|g| !g.is_zero()).collect();
    classes.sort();
    classes.dedup();
    let signs = classes.iter().map(|a| classes.iter().map(|b| a.sign(b)).collect()).collect();
    let mut report = check.report;
    let odd = coordinates.iter().filter(|c| c.is_odd()).count();
    report.push("parity", true, format!("{odd} odd and {} even coordinates", coordinates.len() - odd));
    Ok(Superisation { presentation: d.clone(), coordinates, classes, signs, report })
}

/// Outcome of reading a graded bundle's coordinates as plain Z2-graded
/// variables of parity `weight mod 2`, without linearising first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaiveSuperisation {
    /// Laws after the anticommutation normal form.
    pub reduced: Presentation,
    /// `(transition, law, annihilated part)`.
    pub annihilated: Vec<(String, Var, Poly)>,
    pub report: Report,
}

/// Normal form of the naive reading. A law term with coefficient `c` and odd
/// factors `u1 .. ur` stands for `c / r!` times the sum over all orderings,
/// since coefficient tensors are stored symmetric. For `r >= 2` the orderings
/// cancel in pairs, and an odd square vanishes outright, so every term with
/// at least two odd factors drops out.
pub fn naive_superisation(f: &Presentation) -> Result<NaiveSuperisation> {
    if f.n_weights() != 1 {
        return Err(Error::Invalid(format!("expected a graded bundle, got {} weight fields", f.n_weights())));
    }
    let table = f.weight_table();
    let parity = |v: &Var| table.get(&(v.name.clone(), v.lift)).map_or(0, |w| w[0] % 2);
    let mut reduced = f.clone();
    let mut annihilated = Vec::new();
    for t in &mut reduced.transitions {
        let label = t.label();
        for (v, p) in t.laws.iter_mut() {
            let odd_factors = |m: &crate::graded_algebra::Monomial| -> u32 {
                m.vars.iter().filter(|(u, _)| parity(u) == 1).map(|(_, e)| *e).sum()
            };
            let lost = p.filter_terms(|m| odd_factors(m) >= 2);
            if !lost.is_zero() {
                annihilated.push((label.clone(), v.clone(), lost));
                *p = p.filter_terms(|m| odd_factors(m) < 2);
            }
        }
    }
    let mut report = Report::new();
    for (label, v, lost) in &annihilated {
        report.push(format!("annihilated.{label}.{v}"), true, format!("lost {lost}"));
    }
    report.push(
        "faithful",
        annihilated.is_empty(),
        if annihilated.is_empty() {
            "no term vanishes".to_string()
        } else {
            format!("{} laws lose their nonlinear part", annihilated.len())
        },
    );
    Ok(NaiveSuperisation { reduced, annihilated, report })
}
