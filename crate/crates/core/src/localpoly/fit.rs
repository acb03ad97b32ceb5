use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::basis::{Basis, BasisMode};
use super::kernel::Kernel;
use crate::error::{Error, Result};

/// Relative eigenvalue floor: `B(x)` is singular when
/// `lambda_min <= EIG_FLOOR_REL * trace / N`.
pub const EIG_FLOOR_REL: f64 = 1e-10;

/// Configuration of a degree-`degree` local polynomial fit estimating the
/// directional derivative `D_{v_1..v_s} g` (`s = directions.len()`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalPolyFit {
    pub degree: usize,
    pub bandwidth: f64,
    pub directions: Vec<Vec<f64>>,
    pub mode: BasisMode,
    pub eig_floor_rel: f64,
}

impl LocalPolyFit {
    /// Function estimate (`s = 0`).
    pub fn new(degree: usize, bandwidth: f64) -> Self {
        LocalPolyFit {
            degree,
            bandwidth,
            directions: Vec::new(),
            mode: BasisMode::FactorialScaled,
            eig_floor_rel: EIG_FLOOR_REL,
        }
    }

    pub fn with_directions(mut self, directions: Vec<Vec<f64>>) -> Self {
        self.directions = directions;
        self
    }

    pub fn with_bandwidth(mut self, h: f64) -> Self {
        self.bandwidth = h;
        self
    }

    pub fn with_mode(mut self, mode: BasisMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn deriv_order(&self) -> usize {
        self.directions.len()
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::InvalidInput(format!("bandwidth must be positive, got {}", self.bandwidth)));
        }
        if self.deriv_order() > self.degree {
            return Err(Error::InvalidInput("derivative order exceeds polynomial degree".into()));
        }
        for v in &self.directions {
            if v.len() != dim {
                return Err(Error::InvalidInput("direction dimension mismatch".into()));
            }
            let n = crate::linalg::norm(v);
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!("direction must be a unit vector, norm {n}")));
            }
        }
        Ok(())
    }
}

/// Design points `x_i` in `[0, T]^dx` with targets `Y_i` in `R^dy`, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    dx: usize,
    dy: usize,
    points: Vec<f64>,
    targets: Vec<f64>,
    extent: f64,
    sorted: bool,
}

impl RegressionData {
    pub fn new(points: &[Vec<f64>], targets: &[Vec<f64>], extent: f64) -> Result<Self> {
        let dx = points.first().map(|p| p.len()).unwrap_or(0);
        let dy = targets.first().map(|p| p.len()).unwrap_or(0);
        if points.iter().any(|p| p.len() != dx) || targets.iter().any(|t| t.len() != dy) {
            return Err(Error::InvalidInput("ragged regression data".into()));
        }
        Self::from_flat(
            dx,
            dy,
            points.iter().flatten().cloned().collect(),
            targets.iter().flatten().cloned().collect(),
            extent,
        )
    }

    pub fn from_flat(dx: usize, dy: usize, points: Vec<f64>, targets: Vec<f64>, extent: f64) -> Result<Self> {
        if dx == 0 || dy == 0 {
            return Err(Error::InvalidInput("regression data needs positive dimensions".into()));
        }
        if !points.len().is_multiple_of(dx) || !targets.len().is_multiple_of(dy) || points.len() / dx != targets.len() / dy {
            return Err(Error::InvalidInput("points and targets differ in length".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidInput("regression data is empty".into()));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::InvalidInput("domain extent must be positive".into()));
        }
        let slack = 1e-9 * extent;
        if points.iter().any(|p| !(*p >= -slack && *p <= extent + slack)) {
            return Err(Error::InvalidInput(format!("design points must lie in [0, {extent}]^{dx}")));
        }
        let sorted = dx == 1 && points.windows(2).all(|w| w[0] <= w[1]);
        Ok(RegressionData { dx, dy, points, targets, extent, sorted })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dx
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim_x(&self) -> usize {
        self.dx
    }

    pub fn dim_y(&self) -> usize {
        self.dy
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dx..(i + 1) * self.dx]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.dy..(i + 1) * self.dy]
    }

    /// Same design with new targets.
    pub fn with_targets(&self, dy: usize, targets: Vec<f64>) -> Result<Self> {
        if targets.len() != self.len() * dy {
            return Err(Error::InvalidInput("target count mismatch".into()));
        }
        Ok(RegressionData { dy, targets, ..self.clone() })
    }

    /// Indices whose kernel argument `|x_i - x| / h` is below 1, with that argument.
    fn neighbours(&self, x: &[f64], h: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let range = if self.sorted {
            let lo = self.points.partition_point(|p| *p <= x[0] - h);
            let hi = self.points.partition_point(|p| *p < x[0] + h);
            lo..hi
        } else {
            0..self.len()
        };
        let h2 = h * h;
        for i in range {
            let d2 = crate::linalg::dist_sq(self.point(i), x);
            if d2 < h2 {
                let z = d2.sqrt() / h;
                if z < 1.0 {
                    out.push((i, z));
                }
            }
        }
        out
    }
}

/// Sparse weights: `w_i` for the listed indices, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalWeights {
    pub index: Vec<usize>,
    pub weight: Vec<f64>,
}

impl LocalWeights {
    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut w = vec![0.0; n];
        for (i, v) in self.index.iter().zip(&self.weight) {
            w[*i] = *v;
        }
        w
    }

    /// `sum_i w_i Y_i` componentwise.
    pub fn apply(&self, data: &RegressionData) -> Vec<f64> {
        let mut out = vec![0.0; data.dim_y()];
        for (i, w) in self.index.iter().zip(&self.weight) {
            for (o, y) in out.iter_mut().zip(data.target(*i)) {
                *o += w * y;
            }
        }
        out
    }
}

struct Local {
    index: Vec<usize>,
    psi: Vec<Vec<f64>>,
    k: Vec<f64>,
    b: DMatrix<f64>,
}

fn local_design(x: &[f64], data: &RegressionData, fit: &LocalPolyFit, kernel: Kernel, basis: &Basis) -> Local {
    let h = fit.bandwidth;
    let n = basis.len();
    let mut b = DMatrix::<f64>::zeros(n, n);
    let mut index = Vec::new();
    let mut psi = Vec::new();
    let mut ks = Vec::new();
    let mut z = vec![0.0; data.dim_x()];
    for (i, r) in data.neighbours(x, h) {
        let k = kernel.eval(r);
        if k == 0.0 {
            continue;
        }
        for (zj, (p, q)) in z.iter_mut().zip(data.point(i).iter().zip(x)) {
            *zj = (p - q) / h;
        }
        let v = basis.eval(&z, fit.mode);
        for a in 0..n {
            for c in a..n {
                b[(a, c)] += v[a] * v[c] * k;
            }
        }
        index.push(i);
        psi.push(v);
        ks.push(k);
    }
    let scale = data.extent().powi(data.dim_x() as i32) / (data.len() as f64 * h.powi(data.dim_x() as i32));
    for a in 0..n {
        for c in a..n {
            let v = b[(a, c)] * scale;
            b[(a, c)] = v;
            b[(c, a)] = v;
        }
    }
    Local { index, psi, k: ks, b }
}

fn check_dims(x: &[f64], data: &RegressionData, fit: &LocalPolyFit) -> Result<()> {
    if x.len() != data.dim_x() {
        return Err(Error::InvalidInput("query dimension mismatch".into()));
    }
    fit.validate(data.dim_x())
}

/// `B(x) = (T^d / (n h^d)) sum_i psi(z_i) psi(z_i)^T K(|z_i|)` with `z_i = (x_i - x) / h`.
pub fn design_matrix(x: &[f64], data: &RegressionData, fit: &LocalPolyFit, kernel: Kernel) -> Result<DMatrix<f64>> {
    check_dims(x, data, fit)?;
    let basis = Basis::new(data.dim_x(), fit.degree);
    Ok(local_design(x, data, fit, kernel, &basis).b)
}

/// Nonzero weights `w_i(x) = (T^d / (n h^(d+s))) D_v psi(0)^T B(x)^-1 psi(z_i) K(|z_i|)`.
pub fn local_weights(x: &[f64], data: &RegressionData, fit: &LocalPolyFit, kernel: Kernel) -> Result<LocalWeights> {
    check_dims(x, data, fit)?;
    let basis = Basis::new(data.dim_x(), fit.degree);
    let local = local_design(x, data, fit, kernel, &basis);
    let n = basis.len();
    let trace = local.b.trace();
    let floor = fit.eig_floor_rel * trace / n as f64;
    let lambda_min = if local.index.is_empty() { 0.0 } else { crate::linalg::sym_min_eigenvalue(&local.b) };
    if !(lambda_min > floor) || !(trace > 0.0) {
        return Err(Error::SingularDesign { lambda_min, floor });
    }
    let chol = local
        .b
        .clone()
        .cholesky()
        .ok_or(Error::SingularDesign { lambda_min, floor })?;
    let dpsi = DVector::from_vec(basis.directional_derivative_at_zero(&fit.directions, fit.mode));
    let a = chol.solve(&dpsi);
    let dx = data.dim_x() as i32;
    let h = fit.bandwidth;
    let scale = data.extent().powi(dx) / (data.len() as f64 * h.powi(dx + fit.deriv_order() as i32));
    let weight = local
        .psi
        .iter()
        .zip(&local.k)
        .map(|(p, k)| scale * k * p.iter().zip(a.iter()).map(|(u, v)| u * v).sum::<f64>())
        .collect();
    Ok(LocalWeights { index: local.index, weight })
}

/// Dense weight vector of length `n`; zero outside the kernel support.
pub fn lp_weights(x: &[f64], data: &RegressionData, fit: &LocalPolyFit, kernel: Kernel) -> Result<Vec<f64>> {
    Ok(local_weights(x, data, fit, kernel)?.to_dense(data.len()))
}

/// Componentwise estimate `sum_i w_i(x) Y_i` of `D_v g(x)`.
pub fn lp_estimate(x: &[f64], data: &RegressionData, fit: &LocalPolyFit, kernel: Kernel) -> Result<Vec<f64>> {
    Ok(local_weights(x, data, fit, kernel)?.apply(data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_1d(n: usize) -> Vec<Vec<f64>> {
        (1..=n).map(|k| vec![k as f64 / n as f64]).collect()
    }

    #[test]
    fn empty_window_gives_zero_design() {
        let pts = vec![vec![0.9], vec![1.0]];
        let data = RegressionData::new(&pts, &[vec![1.0], vec![2.0]], 1.0).unwrap();
        let fit = LocalPolyFit::new(1, 0.1);
        let b = design_matrix(&[0.2], &data, &fit, Kernel::Epanechnikov).unwrap();
        assert!(b.iter().all(|v| *v == 0.0));
        assert!(matches!(lp_estimate(&[0.2], &data, &fit, Kernel::Epanechnikov), Err(Error::SingularDesign { .. })));
    }

    #[test]
    fn single_point_constant_design() {
        let data = RegressionData::new(&[vec![0.5]], &[vec![3.0]], 1.0).unwrap();
        let fit = LocalPolyFit::new(0, 1.0);
        let b = design_matrix(&[0.5], &data, &fit, Kernel::Epanechnikov).unwrap();
        assert_eq!(b.nrows(), 1);
        assert_eq!(b[(0, 0)], Kernel::Epanechnikov.eval(0.0));
    }

    #[test]
    fn coincident_points_share_weight() {
        let pts = vec![vec![0.3, 0.3]; 4];
        let ys = vec![vec![1.0], vec![2.0], vec![3.0], vec![6.0]];
        let data = RegressionData::new(&pts, &ys, 1.0).unwrap();
        let w = lp_weights(&[0.3, 0.3], &data, &LocalPolyFit::new(0, 0.2), Kernel::Epanechnikov).unwrap();
        for v in &w {
            assert!((v - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn weights_vanish_outside_support() {
        let pts = grid_1d(50);
        let ys: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0].sin()]).collect();
        let data = RegressionData::new(&pts, &ys, 1.0).unwrap();
        let fit = LocalPolyFit::new(2, 0.1);
        let x = [0.5];
        let w = lp_weights(&x, &data, &fit, Kernel::Epanechnikov).unwrap();
        for (p, wi) in pts.iter().zip(&w) {
            if (p[0] - x[0]).abs() >= 0.1 {
                assert_eq!(*wi, 0.0);
            }
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reproduces_quadratic_and_derivative() {
        let pts = grid_1d(40);
        let q = |t: f64| 1.0 - 2.0 * t + 3.0 * t * t;
        let ys: Vec<Vec<f64>> = pts.iter().map(|p| vec![q(p[0])]).collect();
        let data = RegressionData::new(&pts, &ys, 1.0).unwrap();
        let x = [0.41];
        let est = lp_estimate(&x, &data, &LocalPolyFit::new(2, 0.2), Kernel::Epanechnikov).unwrap();
        assert!((est[0] - q(0.41)).abs() < 1e-10);
        let fit = LocalPolyFit::new(2, 0.2).with_directions(vec![vec![1.0]]);
        let d = lp_estimate(&x, &data, &fit, Kernel::Epanechnikov).unwrap();
        assert!((d[0] - (-2.0 + 6.0 * 0.41)).abs() < 1e-8);
    }

    #[test]
    fn validation() {
        let data = RegressionData::new(&[vec![0.5]], &[vec![3.0]], 1.0).unwrap();
        let bad = LocalPolyFit::new(0, 0.5).with_directions(vec![vec![1.0]]);
        assert!(lp_estimate(&[0.5], &data, &bad, Kernel::Epanechnikov).is_err());
        let nonunit = LocalPolyFit::new(1, 0.5).with_directions(vec![vec![2.0]]);
        assert!(lp_estimate(&[0.5], &data, &nonunit, Kernel::Epanechnikov).is_err());
        assert!(RegressionData::new(&[vec![1.5]], &[vec![0.0]], 1.0).is_err());
        assert!(RegressionData::new(&[vec![0.5]], &[], 1.0).is_err());
    }
}
