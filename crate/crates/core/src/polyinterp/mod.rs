//! Univariate and multivariate polynomial interpolation with the
//! normalization `eta(x) = (x - centroid) / diam` and the stability
//! certificate `||Psi(eta(x))^-1||_2` used to select interpolation stencils.
//!
//! Multivariate interpolation uses plain monomials; see
//! [`crate::localpoly::BasisMode`].

pub mod hull;
pub mod multivariate;
pub mod univariate;

pub use hull::mu_interior_contains;
pub use multivariate::{
    degree_for, interp_multivariate, normalize, normalized_inverse, psi_matrix, stability_norm, Normalization,
    SINGULAR_REL,
};
pub use univariate::{derivative_at, interp_univariate, UniPoly};

/// Interpolation base points with their curve times and certificate data.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub points: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    pub diameter: f64,
    pub stability: f64,
}

impl Stencil {
    pub fn new(points: Vec<Vec<f64>>, times: Vec<f64>, degree: usize) -> Self {
        let diameter = crate::linalg::diameter(&points);
        let stability = stability_norm(&points, degree);
        Stencil { points, times, diameter, stability }
    }
}
