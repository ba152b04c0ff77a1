//! Nonlinear layer: the perturbation-equation fixed point, travelling waves,
//! the transformation chain to the porous medium density and the residual,
//! decay and equivariance checks built on top of it.

pub mod energy;
pub mod fixed_point;
pub mod nonlinearity;
pub mod regularity;
pub mod snapshot;
pub mod transform;
pub mod waves;

pub use fixed_point::{
    generic_initial, linear_operator, pe_fixed_point, pe_residual, FixedPointConfig, FixedPointTrace,
};
pub use nonlinearity::{nonlinearity_divergence_form, nonlinearity_eval};
