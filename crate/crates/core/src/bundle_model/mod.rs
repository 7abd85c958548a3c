//! Local presentations of multi-graded bundles: coordinate blocks, charts,
//! transition laws, morphisms and weight surgery.

pub mod linear;
pub mod morphism;
pub mod numeric;
pub mod presentation;
pub mod surgery;
pub mod validate;

pub use morphism::{validate_morphism, ChartMap, CheckOptions, Morphism, WeightMatch};
pub use numeric::{NumericInstance, DEFAULT_DEGREE_CAP, DEFAULT_SAMPLES};
pub use presentation::{Block, FnDecl, Presentation, Transition};
pub use surgery::{fixed_locus, truncate, zero_negative};
pub use validate::validate;
