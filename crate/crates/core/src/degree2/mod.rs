//! Structures carried by a symmetric double vector bundle: the duals over
//! either leg and their pairing, the skew form on `D*_B`, the Lie algebroid
//! on `D -> A` and its linear Poisson tensor on `D*_A`.
//!
//! Coordinates follow the adapted convention of the symmetric module: side
//! coordinates `y{10}`, `y{01}` of weights (1,0), (0,1) and core coordinates
//! of weight (1,1), with `sigma^* z = z + y10^a y01^b sigma_ba`.

mod algebroid;
mod dual;
mod form;
mod poisson;

pub use algebroid::{algebroid, Algebroid, Section};
pub use dual::{dual_dvb, pairing, pairing_report, DualDVB, Leg};
pub use form::{isotropy_report, skew_form, SkewForm};
pub use poisson::{poisson, Bivector, PoissonTensor};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;

use crate::bundle_model::Presentation;
use crate::error::{Error, Result};
use crate::graded_algebra::{Poly, Var, VarKind};
use crate::symmetric::{double_coordinates, quadratic_part, DoubleCoordinates, SymmetricVB};

pub(crate) fn require_double(d: &Presentation) -> Result<DoubleCoordinates> {
    if d.n_weights() != 2 {
        return Err(Error::Invalid(format!("{} has {} weights, expected 2", d.name, d.n_weights())));
    }
    for b in &d.blocks {
        if b.kind == VarKind::Fibre && !matches!(b.weight.as_slice(), [1, 0] | [0, 1] | [1, 1]) {
            return Err(Error::Invalid(format!("block {} has weight {:?}", b.name, b.weight)));
        }
    }
    let dc = double_coordinates(d);
    if dc.side10.len() != dc.side01.len() {
        return Err(Error::Invalid("side bundles of different rank".into()));
    }
    Ok(dc)
}

/// Part of `p` linear in `f` whose other factors are base coordinates or
/// listed parameters, divided by `f`.
pub(crate) fn coefficient_of(p: &Poly, f: &Var, params: &BTreeSet<Var>) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        if m.exponent(f) == 1 && m.vars.iter().all(|(v, _)| v == f || v.is_base() || params.contains(v)) {
            if let Some((rest, _)) = m.divide_var(f) {
                out.add_term(rest, c.clone());
            }
        }
    }
    out
}

/// `sigma^i_{ab}` on a chart, keyed by `(a, b, i)` positions in the side and
/// core coordinate lists. Zero entries are omitted.
pub fn sigma_coefficients(s: &SymmetricVB, chart: &str) -> Result<BTreeMap<(usize, usize, usize), Poly>> {
    let dc = require_double(&s.d)?;
    let c = quadratic_part(s, chart)?;
    let mut out = BTreeMap::new();
    for (i, z) in dc.core.iter().enumerate() {
        for a in 0..dc.side10.len() {
            for b in 0..dc.side10.len() {
                // sigma_ab is the coefficient of y10^b y01^a
                if let Some(p) = c.get(&(z.clone(), dc.side10[b].clone(), dc.side01[a].clone())) {
                    if !p.is_zero() {
                        out.insert((a, b, i), p.clone());
                    }
                }
            }
        }
    }
    Ok(out)
}
