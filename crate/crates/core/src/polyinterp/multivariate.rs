use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::localpoly::basis::{basis_len, Basis, BasisMode};

/// `Psi` is treated as singular when `sigma_min <= SINGULAR_REL * sigma_max`.
pub const SINGULAR_REL: f64 = 1e-12;

/// Degree `l` with `C(l + d, d) = n`, if any.
pub fn degree_for(d: usize, n: usize) -> Option<usize> {
    (0..=64).find(|&l| basis_len(d, l) == n)
}

/// Rows are the plain monomials `psi(x_k)^T`; Vandermonde in one dimension.
pub fn psi_matrix(points: &[Vec<f64>], degree: usize) -> DMatrix<f64> {
    let d = points.first().map(|p| p.len()).unwrap_or(0);
    let basis = Basis::new(d, degree);
    let n = basis.len();
    let mut m = DMatrix::zeros(points.len(), n);
    for (r, p) in points.iter().enumerate() {
        let row = basis.eval(p, BasisMode::Plain);
        for c in 0..n {
            m[(r, c)] = row[c];
        }
    }
    m
}

/// `eta(x) = (x - centroid) / diam`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub centroid: Vec<f64>,
    pub diameter: f64,
}

impl Normalization {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.centroid).map(|(a, c)| (a - c) / self.diameter).collect()
    }
}

/// Location- and scale-free copy of `points` with centroid 0 and diameter 1.
pub fn normalize(points: &[Vec<f64>]) -> Result<(Normalization, Vec<Vec<f64>>)> {
    let diameter = crate::linalg::diameter(points);
    if !(diameter > 0.0) {
        return Err(Error::ZeroDiameter);
    }
    let d = points[0].len();
    let mut centroid = vec![0.0; d];
    for p in points {
        for (c, v) in centroid.iter_mut().zip(p) {
            *c += v;
        }
    }
    centroid.iter_mut().for_each(|c| *c /= points.len() as f64);
    let eta = Normalization { centroid, diameter };
    let out = points.iter().map(|p| eta.apply(p)).collect();
    Ok((eta, out))
}

/// `||Psi(eta(x))^-1||_2`, or infinity when the normalized matrix is not
/// square or numerically singular.
pub fn stability_norm(points: &[Vec<f64>], degree: usize) -> f64 {
    let d = points.first().map(|p| p.len()).unwrap_or(0);
    if points.len() != basis_len(d, degree) {
        return f64::INFINITY;
    }
    if points.len() == 1 {
        return 1.0;
    }
    let Ok((_, normed)) = normalize(points) else {
        return f64::INFINITY;
    };
    let sv = crate::linalg::singular_values(&psi_matrix(&normed, degree));
    let (max, min) = (sv[0], *sv.last().unwrap());
    if !(min > SINGULAR_REL * max) {
        return f64::INFINITY;
    }
    1.0 / min
}

/// Componentwise interpolation `psi(x)^T Psi(x_pts)^-1 y` in the unique
/// degree-`l` space with `C(l + d, d) = N`; the zero vector when `Psi` is
/// singular. Solved in normalized coordinates, which gives the same
/// polynomial by affine invariance.
pub fn interp_multivariate(points: &[Vec<f64>], values: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let dy = values.first().map(|v| v.len()).unwrap_or(0);
    let zero = vec![0.0; dy];
    let d = x.len();
    let Some(degree) = degree_for(d, points.len()) else {
        return zero;
    };
    if points.len() != values.len() || points.iter().any(|p| p.len() != d) {
        return zero;
    }
    if points.len() == 1 {
        return values[0].clone();
    }
    let Ok((eta, normed)) = normalize(points) else {
        return zero;
    };
    let psi = psi_matrix(&normed, degree);
    let sv = crate::linalg::singular_values(&psi);
    if !(sv[sv.len() - 1] > SINGULAR_REL * sv[0]) {
        return zero;
    }
    let Some(coef) = solve_pivoted(psi, values) else {
        return zero;
    };
    let basis = Basis::new(d, degree);
    let px = basis.eval(&eta.apply(x), BasisMode::Plain);
    (0..dy).map(|c| px.iter().enumerate().map(|(k, p)| p * coef[(k, c)]).sum()).collect()
}

fn solve_pivoted(psi: DMatrix<f64>, values: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let n = psi.nrows();
    let dy = values[0].len();
    let rhs = DMatrix::from_fn(n, dy, |r, c| values[r][c]);
    psi.col_piv_qr().solve(&rhs)
}

/// Inverse `Psi(eta(x))^-1`, if invertible.
pub fn normalized_inverse(points: &[Vec<f64>], degree: usize) -> Option<DMatrix<f64>> {
    if !stability_norm(points, degree).is_finite() {
        return None;
    }
    let (_, normed) = normalize(points).ok()?;
    psi_matrix(&normed, degree).try_inverse()
}
