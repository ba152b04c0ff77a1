//! Numerical laboratory for the Lipschitz-stability theory of flat travelling
//! waves of the porous medium equation.
//!
//! The crate covers the intrinsic half-space geometry, weighted measures, the
//! degenerate linear semigroup of `y_n Δ + (1+σ) ∂_n` with its Green kernel,
//! the bespoke `X(p)` / `Y(p)` norms, the nonlinear perturbation fixed point
//! and the transformation chain back to the porous medium density.

// `!(a <= b)` lets NaN fail a bound.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod bessel_core;
pub mod error;
pub mod field;
pub mod function_norms;
pub mod geometry;
pub mod green_semigroup;
pub mod lab;
pub mod par;
pub mod pme_solvers;
pub mod quad;
pub mod weighted_measure;

pub use error::{LabError, Result};
pub use field::{HalfSpaceGrid, SampledField};
pub use geometry::HalfSpacePoint;
pub use weighted_measure::SigmaParam;

/// Default seed for every seeded sweep.
pub const DEFAULT_SEED: u64 = 0x5EED;
