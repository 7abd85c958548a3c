use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graded_algebra::{name, FnSym, Lift, MultiWeight, Name, Poly, Var, VarKind};

/// A block of `size` coordinates sharing a name, a lift label and a weight.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Block {
    pub name: Name,
    pub lift: Lift,
    pub size: u32,
    pub weight: MultiWeight,
    pub kind: VarKind,
}

impl Block {
    pub fn base(name: &str, size: u32, n: usize) -> Block {
        Block { name: self::name(name), lift: Lift::NONE, size, weight: alloc::vec![0; n], kind: VarKind::Base }
    }

    pub fn fibre(name: &str, lift: Lift, size: u32, weight: MultiWeight) -> Block {
        Block { name: self::name(name), lift, size, weight, kind: VarKind::Fibre }
    }

    pub fn var(&self, index: u32) -> Var {
        Var::new(self.kind, self.name.clone(), self.lift, index)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        (1..=self.size).map(move |i| self.var(i))
    }

    pub fn key(&self) -> (Name, Lift) {
        (self.name.clone(), self.lift)
    }
}

/// Declaration of an opaque coefficient function family.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FnDecl {
    pub name: Name,
    /// Lower indices commute.
    pub symmetric: bool,
    pub invertible: bool,
    pub inverse: Option<Name>,
}

impl FnDecl {
    pub fn plain(n: &str) -> FnDecl {
        FnDecl { name: name(n), symmetric: true, invertible: false, inverse: None }
    }

    pub fn invertible(n: &str, inverse: &str) -> FnDecl {
        FnDecl { name: name(n), symmetric: true, invertible: true, inverse: Some(name(inverse)) }
    }

    pub fn nonsymmetric(n: &str) -> FnDecl {
        FnDecl { name: name(n), symmetric: false, invertible: false, inverse: None }
    }
}

/// Coordinate change from chart `from` to chart `to`: every coordinate of
/// `to` written as a polynomial in the coordinates of `from`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: Name,
    pub to: Name,
    pub laws: BTreeMap<Var, Poly>,
}

impl Transition {
    pub fn label(&self) -> String {
        format!("{}->{}", self.from, self.to)
    }
}

/// Local presentation of a bundle with `n` commuting weight fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub name: String,
    /// Upper bound of every weight field.
    pub degree: Vec<u32>,
    /// Number of tangent-lift positions already used in coordinate labels.
    pub lift_depth: usize,
    pub blocks: Vec<Block>,
    pub fns: Vec<FnDecl>,
    pub charts: Vec<Name>,
    pub transitions: Vec<Transition>,
}

impl Presentation {
    pub fn n_weights(&self) -> usize {
        self.degree.len()
    }

    pub fn block(&self, name: &str, lift: Lift) -> Option<&Block> {
        self.blocks.iter().find(|b| &*b.name == name && b.lift == lift)
    }

    pub fn block_of(&self, v: &Var) -> Option<&Block> {
        self.block(&v.name, v.lift).filter(|b| b.kind == v.kind && v.index >= 1 && v.index <= b.size)
    }

    pub fn has_var(&self, v: &Var) -> bool {
        self.block_of(v).is_some()
    }

    pub fn weight(&self, v: &Var) -> Result<&MultiWeight> {
        self.block_of(v).map(|b| &b.weight).ok_or_else(|| Error::Unknown(v.to_string()))
    }

    /// Lookup table from block key to weight, for hot loops.
    pub fn weight_table(&self) -> BTreeMap<(Name, Lift), MultiWeight> {
        self.blocks.iter().map(|b| (b.key(), b.weight.clone())).collect()
    }

    pub fn vars(&self) -> Vec<Var> {
        self.blocks.iter().flat_map(|b| b.vars()).collect()
    }

    pub fn base_vars(&self) -> Vec<Var> {
        self.blocks.iter().filter(|b| b.kind == VarKind::Base).flat_map(|b| b.vars()).collect()
    }

    pub fn fibre_vars(&self) -> Vec<Var> {
        self.blocks.iter().filter(|b| b.kind == VarKind::Fibre).flat_map(|b| b.vars()).collect()
    }

    pub fn fn_decl(&self, name: &str) -> Option<&FnDecl> {
        self.fns.iter().find(|d| &*d.name == name)
    }

    pub fn transition(&self, from: &str, to: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| &*t.from == from && &*t.to == to)
    }

    /// Removes blocks selected by `drop`, keeping laws of the survivors as they are.
    pub fn retain_blocks(&mut self, keep: impl Fn(&Block) -> bool) {
        let removed: BTreeSet<(Name, Lift)> = self.blocks.iter().filter(|b| !keep(b)).map(|b| b.key()).collect();
        self.blocks.retain(|b| !removed.contains(&b.key()));
        for t in &mut self.transitions {
            t.laws.retain(|v, _| !removed.contains(&(v.name.clone(), v.lift)));
        }
    }

    pub fn map_laws(&mut self, mut f: impl FnMut(&Var, &Poly) -> Result<Poly>) -> Result<()> {
        for t in &mut self.transitions {
            let mut laws = BTreeMap::new();
            for (v, p) in &t.laws {
                laws.insert(v.clone(), f(v, p)?);
            }
            t.laws = laws;
        }
        Ok(())
    }

    /// Declares every symbol symmetric in its lower indices, reordering the
    /// slots of each occurrence. Contractions with commuting coordinates only
    /// see the symmetric part, so the laws are unchanged as functions; one
    /// warning per symbol whose occurrences were actually reordered.
    pub fn symmetrised(&self) -> (Presentation, Vec<String>) {
        let mut out = self.clone();
        let mut warnings = Vec::new();
        let targets: BTreeSet<Name> = self.fns.iter().filter(|d| !d.symmetric).map(|d| d.name.clone()).collect();
        if targets.is_empty() {
            return (out, warnings);
        }
        let mut reordered: BTreeMap<Name, usize> = BTreeMap::new();
        for t in &mut out.transitions {
            for l in t.laws.values_mut() {
                for f in l.fns() {
                    if targets.contains(&f.name) && f.lower.windows(2).any(|w| w[0] > w[1]) {
                        *reordered.entry(f.name.clone()).or_default() += 1;
                    }
                }
                *l = l.map_fns(|f| {
                    if targets.contains(&f.name) {
                        FnSym::new(f.name.clone(), true, f.lower.clone(), f.upper.clone(), f.deriv.clone())
                    } else {
                        f.clone()
                    }
                });
            }
        }
        for d in &mut out.fns {
            d.symmetric = true;
        }
        for (n, count) in reordered {
            warnings.push(format!("symbol {n} symmetrised in its lower indices ({count} occurrences reordered)"));
        }
        (out, warnings)
    }

    /// Renames coordinates everywhere; `f` must be injective on blocks.
    pub fn rename(&self, f: impl Fn(&Var) -> Var) -> Presentation {
        let mut out = self.clone();
        for b in &mut out.blocks {
            let v = f(&b.var(1));
            b.name = v.name;
            b.lift = v.lift;
            b.kind = v.kind;
        }
        for t in &mut out.transitions {
            t.laws = t.laws.iter().map(|(v, p)| (f(v), p.rename(&f))).collect();
        }
        out
    }

    /// Structural equality up to block order and presentation name.
    pub fn compare(&self, other: &Presentation) -> core::result::Result<(), String> {
        if self.degree != other.degree {
            return Err(format!("degree bounds {:?} vs {:?}", self.degree, other.degree));
        }
        let a: BTreeSet<_> = self.blocks.iter().collect();
        let b: BTreeSet<_> = other.blocks.iter().collect();
        if a != b {
            let only_a: Vec<String> = a.difference(&b).map(|b| describe_block(b)).collect();
            let only_b: Vec<String> = b.difference(&a).map(|b| describe_block(b)).collect();
            return Err(format!("blocks differ: only left {only_a:?}, only right {only_b:?}"));
        }
        let ca: BTreeSet<_> = self.charts.iter().collect();
        let cb: BTreeSet<_> = other.charts.iter().collect();
        if ca != cb {
            return Err("charts differ".to_string());
        }
        for t in &self.transitions {
            let Some(u) = other.transition(&t.from, &t.to) else {
                return Err(format!("transition {} missing on the right", t.label()));
            };
            for (v, p) in &t.laws {
                let q = u.laws.get(v).cloned().unwrap_or_default();
                if *p != q {
                    return Err(format!("law of {v} in {} differs: {p}  vs  {q}", t.label()));
                }
            }
            for v in u.laws.keys() {
                if !t.laws.contains_key(v) {
                    return Err(format!("law of {v} in {} missing on the left", t.label()));
                }
            }
        }
        if self.transitions.len() != other.transitions.len() {
            return Err("transition count differs".to_string());
        }
        Ok(())
    }
}

pub fn describe_block(b: &Block) -> String {
    let mut s = String::new();
    s.push_str(&b.name);
    let _ = b.lift.write_padded(&mut s, 0);
    format!("{s}[{}] weight {:?}", b.size, b.weight)
}
