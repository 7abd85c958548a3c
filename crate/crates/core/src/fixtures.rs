//! Programmatic presentations used by tests, examples and the command line.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::bundle_model::linear::{compose_transitions, invert_transition};
use crate::bundle_model::{Block, FnDecl, Presentation, Transition};
use crate::error::Result;
use crate::graded_algebra::{factorial, name, FnSym, Label, Lift, Monomial, Poly, Var, Q};

/// Blocks `(name, weight, size)` over a base block `x` of size `base`.
#[derive(Clone, Debug)]
pub struct GradedSpec {
    pub name: &'static str,
    pub base: u32,
    pub blocks: Vec<(&'static str, u32, u32)>,
    /// Base law `x' = X(x)` instead of the identity.
    pub opaque_base: bool,
}

pub const WEIGHT_NAMES: [&str; 6] = ["y", "z", "w", "v", "u", "s"];

impl GradedSpec {
    /// One block per weight `1..=k`, all of size `dim`.
    pub fn uniform(name: &'static str, k: u32, dim: u32, base: u32) -> GradedSpec {
        GradedSpec { name, base, blocks: (1..=k).map(|w| (WEIGHT_NAMES[w as usize - 1], w, dim)).collect(), opaque_base: true }
    }

    pub fn degree(&self) -> u32 {
        self.blocks.iter().map(|b| b.1).max().unwrap_or(0)
    }
}

fn tuples(vars: &[(Var, u32)], w: u32) -> Vec<Vec<Var>> {
    if w == 0 {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (v, wv) in vars {
        if *wv <= w {
            for mut rest in tuples(vars, w - wv) {
                rest.insert(0, v.clone());
                out.push(rest);
            }
        }
    }
    out
}

/// General law `y'_w = sum_n (1/n!) sum y^{j_1}..y^{j_n} T_{j_n..j_1}` over
/// ordered tuples of fibre coordinates of total weight `w`.
fn generic_law(fibre: &[(Var, u32)], target: &Var, w: u32, sym: &str) -> Poly {
    let mut law = Poly::zero();
    for t in tuples(fibre, w) {
        let lower: Vec<Label> = t.iter().rev().map(|v| v.label()).collect();
        let f = FnSym::sym(sym, lower, alloc::vec![target.label()]);
        let m = Monomial::from_vars(t.iter().cloned()).mul(&Monomial::fnsym(f));
        law.add_term(m, Q::from_integer(1.into()) / factorial(t.len() as u32));
    }
    law
}

fn base_law(x: &Var, opaque: bool, sym: &str) -> Poly {
    if opaque {
        Poly::fnsym(FnSym::sym(sym, Vec::new(), alloc::vec![x.label()]))
    } else {
        Poly::var(x.clone())
    }
}

fn graded_laws(p: &Presentation, opaque: bool, coeff: &str, basemap: &str) -> BTreeMap<Var, Poly> {
    let fibre: Vec<(Var, u32)> = p.blocks.iter().filter(|b| b.weight[0] > 0).flat_map(|b| b.vars().map(|v| (v, b.weight[0]))).collect();
    let mut laws = BTreeMap::new();
    for x in p.base_vars() {
        laws.insert(x.clone(), base_law(&x, opaque, basemap));
    }
    for (v, w) in &fibre {
        laws.insert(v.clone(), generic_law(&fibre, v, *w, coeff));
    }
    laws
}

fn skeleton(spec: &GradedSpec) -> Presentation {
    let mut blocks = alloc::vec![Block::base("x", spec.base, 1)];
    for (n, w, d) in &spec.blocks {
        blocks.push(Block::fibre(n, Lift::NONE, *d, alloc::vec![*w]));
    }
    Presentation {
        name: spec.name.to_string(),
        degree: alloc::vec![spec.degree()],
        lift_depth: 0,
        blocks,
        fns: Vec::new(),
        charts: alloc::vec![name("U"), name("V")],
        transitions: Vec::new(),
    }
}

/// Graded bundle with the most general transition law `U -> V`, coefficient
/// family `T` (inverse `Ti`) and base map `X` (inverse `Xi`).
pub fn graded(spec: &GradedSpec) -> Presentation {
    let mut p = skeleton(spec);
    p.fns = alloc::vec![FnDecl::invertible("T", "Ti"), FnDecl::invertible("Ti", "T")];
    if spec.opaque_base {
        p.fns.push(FnDecl::invertible("X", "Xi"));
        p.fns.push(FnDecl::invertible("Xi", "X"));
    }
    let laws = graded_laws(&p, spec.opaque_base, "T", "X");
    p.transitions.push(Transition { from: name("U"), to: name("V"), laws });
    p
}

pub fn vector_bundle(dim: u32, base: u32) -> Presentation {
    graded(&GradedSpec { name: "E", base, blocks: alloc::vec![("y", 1, dim)], opaque_base: true })
}

pub fn f2() -> Presentation {
    graded(&GradedSpec::uniform("F2", 2, 2, 1))
}

pub fn f3() -> Presentation {
    graded(&GradedSpec::uniform("F3", 3, 2, 1))
}

pub fn f4() -> Presentation {
    graded(&GradedSpec::uniform("F4", 4, 1, 1))
}

/// Three charts with identity base laws and a cocycle-consistent cycle
/// `U -> V -> W -> U`; the closing law composes the two inverses.
pub fn cocycle_f2() -> Result<Presentation> {
    let spec = GradedSpec { opaque_base: false, ..GradedSpec::uniform("F2c", 2, 2, 1) };
    let mut p = skeleton(&spec);
    p.charts.push(name("W"));
    p.fns = alloc::vec![
        FnDecl::invertible("T", "Ti"),
        FnDecl::invertible("Ti", "T"),
        FnDecl::invertible("R", "Ri"),
        FnDecl::invertible("Ri", "R"),
    ];
    let uv = Transition { from: name("U"), to: name("V"), laws: graded_laws(&p, false, "T", "X") };
    let vw = Transition { from: name("V"), to: name("W"), laws: graded_laws(&p, false, "R", "X") };
    let wu = compose_transitions(&invert_transition(&p, &vw)?, &invert_transition(&p, &uv)?)?;
    p.transitions = alloc::vec![uv, vw, wu];
    Ok(p)
}

/// How the coordinates of `T^k M` are normalised.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Jets {
    /// `x^(a)` is the `a`-th derivative of a curve.
    Derivative,
    /// `x_a` is the `a`-th Taylor coefficient, `x^(a) / a!`.
    Taylor,
}

pub fn jet_name(a: u32) -> alloc::string::String {
    let mut s = alloc::string::String::new();
    for _ in 0..a {
        s.push('d');
    }
    s.push('x');
    s
}

/// Higher tangent bundle `T^k M` over `M` of dimension `m`, with base map
/// `X` (inverse `Xi`).
pub fn higher_tangent(k: u32, m: u32, jets: Jets) -> Presentation {
    let mut blocks = alloc::vec![Block::base("x", m, 1)];
    for a in 1..=k {
        blocks.push(Block::fibre(&jet_name(a), Lift::NONE, m, alloc::vec![a]));
    }
    let coord = |a: u32, i: u32| if a == 0 { Var::base("x", i) } else { Var::fibre(&jet_name(a), Lift::NONE, i) };
    let mut laws: BTreeMap<Var, Poly> = BTreeMap::new();
    let mut layer: Vec<Poly> = (1..=m).map(|i| base_law(&coord(0, i), true, "X")).collect();
    for (i, l) in layer.iter().enumerate() {
        laws.insert(coord(0, i as u32 + 1), l.clone());
    }
    for a in 1..=k {
        // total derivative D = sum_b x^(b+1) d/dx^(b)
        layer = layer
            .iter()
            .map(|l| {
                let mut out = Poly::zero();
                for b in 0..a {
                    for i in 1..=m {
                        out = &out + &(&l.formal_partial(&coord(b, i)) * &Poly::var(coord(b + 1, i)));
                    }
                }
                out
            })
            .collect();
        for (i, l) in layer.iter().enumerate() {
            laws.insert(coord(a, i as u32 + 1), l.clone());
        }
    }
    if jets == Jets::Taylor {
        let scale: BTreeMap<Var, Poly> = (1..=k).flat_map(|a| (1..=m).map(move |i| (a, i))).map(|(a, i)| (coord(a, i), Poly::var(coord(a, i)).scale(&factorial(a)))).collect();
        laws = laws
            .into_iter()
            .map(|(v, l)| {
                let a = v.name.len() as u32 - 1;
                let l = l.substitute(&scale).expect("identity on the base");
                (v, l.scale(&(Q::from_integer(1.into()) / factorial(a))))
            })
            .collect();
    }
    Presentation {
        name: format!("T{k}M"),
        degree: alloc::vec![k],
        lift_depth: 0,
        blocks,
        fns: alloc::vec![FnDecl::invertible("X", "Xi"), FnDecl::invertible("Xi", "X")],
        charts: alloc::vec![name("U"), name("V")],
        transitions: alloc::vec![Transition { from: name("U"), to: name("V"), laws }],
    }
}

/// Graded bundles of degree 1 to 3 exercising mixed block sizes, several
/// blocks of one weight, opaque and identity base maps.
pub fn corpus() -> Vec<Presentation> {
    alloc::vec![
        vector_bundle(2, 2),
        f2(),
        graded(&GradedSpec { name: "F2b", base: 1, blocks: alloc::vec![("y", 1, 1), ("v", 1, 1), ("z", 2, 2)], opaque_base: false }),
        f3(),
        graded(&GradedSpec { name: "F3b", base: 2, blocks: alloc::vec![("y", 1, 1), ("w", 3, 1)], opaque_base: true }),
        higher_tangent(2, 2, Jets::Derivative),
        higher_tangent(3, 1, Jets::Derivative),
    ]
}

/// First chart only, without transitions: a trivial bundle on which every
/// weight-preserving map is a morphism.
pub fn local(p: &Presentation) -> Presentation {
    let mut out = p.clone();
    out.charts.truncate(1);
    out.transitions.clear();
    out.name = format!("{}_local", p.name);
    out
}
