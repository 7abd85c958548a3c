//! Weighted polynomial algebra: coordinates, opaque coefficient functions of
//! the base point, and exact rational polynomials in both.

pub mod linalg;
pub mod perm;
pub mod poly;
pub mod symbol;

pub use poly::{factorial, q, qi, Monomial, Poly, WeightCheck, Q};
pub use symbol::{name, FnSym, Label, Lift, Name, Var, VarKind};

/// Weight vector of a coordinate block; one entry per weight field.
pub type MultiWeight = alloc::vec::Vec<u32>;

/// Integer combination `sum_s a_s w_s` of a weight vector.
pub fn combine(a: &[i64], w: &[u32]) -> i64 {
    a.iter().zip(w).map(|(a, w)| a * *w as i64).sum()
}
