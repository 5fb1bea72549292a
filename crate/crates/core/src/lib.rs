//! Certified finite-stage constructions for the operators
//! `T_{n,λ}(f)(z) = λ^n f^(n)(λz)`.
//!
//! The crate is organised bottom-up: [`poly_core`] supplies extended-range
//! polynomial arithmetic and norms, [`blocks`] the closed-form solution
//! polynomials and their error bounds, [`sequences`] the integer sequences
//! and partitions, [`weyl`] equidistribution and rotation transfer, and
//! [`constructor`] the stage builder, verifier and multi-stage pipeline.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod constructor;
pub mod error;
pub mod poly_core;
pub mod sequences;
pub mod weyl;

pub use error::{BudgetReport, Error, Extrapolation, Result};
pub use poly_core::{Dd, OperatorSpec, Polynomial, SparsePoly, XComplex, XFloat};

/// Relative inflation applied to every certified bound to absorb the
/// floating-point rounding of the evaluation itself.
pub const ROUNDING_SLACK: f64 = 1e-9;
