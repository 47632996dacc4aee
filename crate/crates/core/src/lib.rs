//! Mechanical systems on pseudo-Riemannian charts and residual checks for
//! Euler fluids read as intermediate integrals of Newton fields.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constraints;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod fluids;
pub mod geometry;
pub mod identities;
pub mod integrate;
pub mod intermediate;
pub mod sampling;
pub mod scenario;

pub use error::{Error, Result};
