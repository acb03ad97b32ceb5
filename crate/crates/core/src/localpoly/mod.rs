//! Multivariate local polynomial regression for a function and its
//! directional derivatives, with kernel weights supported on the unit ball.
//!
//! The estimate at `x` is linear in the targets, `sum_i w_i(x) Y_i`, and
//! reproduces every polynomial of degree at most `degree` exactly whenever
//! the local design matrix is nonsingular.

pub mod bandwidth;
pub mod basis;
pub mod fit;
pub mod grid;
pub mod kernel;

pub use bandwidth::{optimal_bandwidth, pilot_bandwidth, BandwidthMode};
pub use basis::{basis_len, monomial_basis, multi_indices, Basis, BasisMode};
pub use fit::{design_matrix, local_weights, lp_estimate, lp_weights, LocalPolyFit, LocalWeights, RegressionData};
pub use grid::{check_grid_assumptions, uniform_grid, GridReport};
pub use kernel::Kernel;
