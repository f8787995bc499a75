//! Numerical kernels shared by the averaging, certification and dynamics
//! layers: quadrature, finite-difference Jacobians, damped Newton, matrix
//! exponential, small eigenproblems and weighted max norms.

mod diff;
mod eigen;
mod expm;
mod norm;
mod quad;

pub use diff::{det_scale, fd_jacobian, fd_jacobian_step, inf_norm as vec_inf_norm, newton, NewtonOutcome, FD_STEP};
pub use eigen::eig_small;
pub use expm::{expm, MAX_DIM};
pub use norm::{induced_norm, inf_norm, matrix_from_rows, matrix_to_rows, WeightedNorm, MAX_CONDITION};
pub use quad::{quad, quad_vec, QuadratureSpec};

pub use nalgebra::{Complex, DMatrix};
