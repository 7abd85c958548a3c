//! Graded bundles, their full linearisation to symmetric k-fold vector
//! bundles, and the inverse diagonalisation, all on exact rational
//! polynomial presentations.

#![no_std]

extern crate alloc;

pub mod bundle_model;
pub mod degree2;
pub mod functors;
pub mod error;
pub mod fixtures;
pub mod graded_algebra;
pub mod report;
pub mod superise;
pub mod symmetric;

pub use error::{Error, Result};
pub use report::{Check, Report};
