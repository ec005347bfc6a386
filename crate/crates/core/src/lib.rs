//! Numerical laboratory for the vanishing-viscosity limit of incompressible
//! flow with Navier-slip walls.
//!
//! The crate computes a viscous reference solution, the inviscid base flow,
//! the boundary-layer profile and its correctors, assembles the two-scale
//! ansatz and measures how fast the viscous solution approaches the inviscid
//! one as `ν → 0`.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod euler;
pub mod expansion;
pub mod geometry;
pub mod layer;
pub mod ns;
pub mod numerics;
pub mod spaces;
pub mod study;

pub use error::{Error, Result};
