//! Finite-temperature Casimir energy of stacks of equal cavities bounded by
//! dielectric slabs or plasma sheets, with the fits and superconducting
//! transition estimates built on it.

// Negated comparisons reject NaN inputs; reference constants keep all digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod assembly;
pub mod cli;
pub mod coeffs;
pub mod energy;
pub mod error;
pub mod fitting;
pub mod oracle;
pub mod phys;
pub mod quadrature;
pub mod superconductor;

pub use error::{Error, Result};
