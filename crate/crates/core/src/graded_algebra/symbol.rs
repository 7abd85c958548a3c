use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

/// Shared, cheaply clonable identifier.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Tangent-lift label: bit `p` is set when the coordinate was produced by the
/// tangent lift at position `p`. Trailing zeros carry no information, so the
/// bitmask itself is the canonical form.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Lift(pub u32);

impl Lift {
    pub const NONE: Lift = Lift(0);

    pub fn from_bits(bits: &[u32]) -> Lift {
        let mut m = 0;
        for (p, &b) in bits.iter().enumerate() {
            if b != 0 {
                m |= 1 << p;
            }
        }
        Lift(m)
    }

    pub fn bit(self, p: usize) -> bool {
        self.0 >> p & 1 == 1
    }

    pub fn with(self, p: usize) -> Lift {
        Lift(self.0 | 1 << p)
    }

    pub fn without(self, p: usize) -> Lift {
        Lift(self.0 & !(1 << p))
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    /// Minimal number of positions needed to print the label.
    pub fn len(self) -> usize {
        (32 - self.0.leading_zeros()) as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self, depth: usize) -> Vec<u32> {
        (0..depth).map(|p| self.bit(p) as u32).collect()
    }

    /// Shift every position up by `by`.
    pub fn shifted(self, by: usize) -> Lift {
        Lift(self.0 << by)
    }

    /// Right action of a permutation on labels: `(e.g)_i = e_{g(i)}`.
    pub fn act(self, g: &[usize]) -> Lift {
        let mut m = 0;
        for (i, &gi) in g.iter().enumerate() {
            if self.bit(gi) {
                m |= 1 << i;
            }
        }
        Lift(m)
    }

    pub fn write_padded(self, f: &mut impl fmt::Write, depth: usize) -> fmt::Result {
        let depth = depth.max(self.len());
        if depth == 0 {
            return Ok(());
        }
        f.write_char('{')?;
        for p in 0..depth {
            f.write_char(if self.bit(p) { '1' } else { '0' })?;
        }
        f.write_char('}')
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum VarKind {
    Base,
    Fibre,
}

/// A single coordinate function: component `index` (1-based) of the block
/// `(name, lift)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var {
    pub kind: VarKind,
    pub name: Name,
    pub lift: Lift,
    pub index: u32,
}

impl Var {
    pub fn new(kind: VarKind, name: Name, lift: Lift, index: u32) -> Var {
        Var { kind, name, lift, index }
    }

    pub fn base(name: &str, index: u32) -> Var {
        Var::new(VarKind::Base, self::name(name), Lift::NONE, index)
    }

    pub fn fibre(name: &str, lift: Lift, index: u32) -> Var {
        Var::new(VarKind::Fibre, self::name(name), lift, index)
    }

    pub fn is_base(&self) -> bool {
        self.kind == VarKind::Base
    }

    /// The coordinate produced from `self` by the tangent lift at position `p`.
    pub fn lifted(&self, p: usize) -> Var {
        Var::new(VarKind::Fibre, self.name.clone(), self.lift.with(p), self.index)
    }

    pub fn with_lift(&self, lift: Lift) -> Var {
        Var::new(self.kind, self.name.clone(), lift, self.index)
    }

    pub fn label(&self) -> Label {
        Label { name: self.name.clone(), index: self.index }
    }

    pub fn write_padded(&self, f: &mut impl fmt::Write, depth: usize) -> fmt::Result {
        f.write_str(&self.name)?;
        self.lift.write_padded(f, depth)?;
        write!(f, "[{}]", self.index)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_padded(&mut s, 0)?;
        f.write_str(&s)
    }
}

/// Index slot of a coefficient symbol: a block name with a component index.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Label {
    pub name: Name,
    pub index: u32,
}

impl Label {
    pub fn new(name: &str, index: u32) -> Label {
        Label { name: self::name(name), index }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, self.index)
    }
}

/// An opaque coefficient function of the base point, such as `T_{ba}^{i'}` or
/// one of its derivatives. Lower indices of a symmetric symbol are kept
/// sorted; derivative slots are always sorted.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct FnSym {
    pub name: Name,
    pub symmetric: bool,
    pub lower: Vec<Label>,
    pub upper: Vec<Label>,
    pub deriv: Vec<Label>,
}

impl FnSym {
    pub fn new(name: Name, symmetric: bool, mut lower: Vec<Label>, upper: Vec<Label>, mut deriv: Vec<Label>) -> FnSym {
        if symmetric {
            lower.sort();
        }
        deriv.sort();
        FnSym { name, symmetric, lower, upper, deriv }
    }

    pub fn sym(name: &str, lower: Vec<Label>, upper: Vec<Label>) -> FnSym {
        FnSym::new(self::name(name), true, lower, upper, Vec::new())
    }

    pub fn differentiated(&self, by: Label) -> FnSym {
        let mut deriv = self.deriv.clone();
        let at = deriv.partition_point(|d| *d <= by);
        deriv.insert(at, by);
        FnSym { deriv, ..self.clone() }
    }

    pub fn underived(&self) -> FnSym {
        FnSym { deriv: Vec::new(), ..self.clone() }
    }
}

impl fmt::Display for FnSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.name)?;
        let list = |f: &mut fmt::Formatter<'_>, xs: &[Label]| -> fmt::Result {
            for (i, l) in xs.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{l}")?;
            }
            Ok(())
        };
        list(f, &self.lower)?;
        f.write_str(";")?;
        list(f, &self.upper)?;
        if !self.deriv.is_empty() {
            f.write_str("|")?;
            list(f, &self.deriv)?;
        }
        f.write_str("]")
    }
}
