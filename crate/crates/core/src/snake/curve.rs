use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SnakeDataset;
use crate::error::{Error, Result};
use crate::localpoly::{local_weights, optimal_bandwidth, BandwidthMode, Kernel, LocalPolyFit, RegressionData};
use crate::odeflow::VectorField;

/// A curve `u: [0, T] -> R^d` with velocity.
pub trait Curve: Send + Sync {
    fn dim(&self) -> usize;
    fn horizon(&self) -> f64;
    fn position(&self, t: f64) -> Vec<f64>;
    fn velocity(&self, t: f64) -> Vec<f64>;
}

/// Analytically known curve, used to inject the truth into the estimators.
pub struct ExactCurve {
    dim: usize,
    horizon: f64,
    pos: Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    vel: Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
}

impl ExactCurve {
    pub fn new(
        dim: usize,
        horizon: f64,
        pos: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        vel: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        ExactCurve { dim, horizon, pos: Box::new(pos), vel: Box::new(vel) }
    }
}

impl Curve for ExactCurve {
    fn dim(&self) -> usize {
        self.dim
    }
    fn horizon(&self) -> f64 {
        self.horizon
    }
    fn position(&self, t: f64) -> Vec<f64> {
        (self.pos)(t)
    }
    fn velocity(&self, t: f64) -> Vec<f64> {
        (self.vel)(t)
    }
}

/// Widening factor applied to the window while the local design is singular.
const WIDEN: f64 = 1.5;

/// Componentwise local polynomial fit of the observations against time.
/// Where the local design is singular (near the ends of `[0, T]` for small
/// windows) the window is widened until it is not.
pub struct LocalPolyCurve {
    data: RegressionData,
    degree: usize,
    bandwidth: f64,
    kernel: Kernel,
}

impl LocalPolyCurve {
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    fn fit(&self, t: f64, deriv: bool) -> Vec<f64> {
        let t = t.clamp(0.0, self.data.extent());
        let mut fit = LocalPolyFit::new(self.degree, self.bandwidth);
        if deriv {
            fit = fit.with_directions(vec![vec![1.0]]);
        }
        let limit = 4.0 * self.data.extent() + self.bandwidth;
        loop {
            match local_weights(&[t], &self.data, &fit, self.kernel) {
                Ok(w) => return w.apply(&self.data),
                Err(_) if fit.bandwidth < limit => fit.bandwidth *= WIDEN,
                Err(_) => return vec![f64::NAN; self.data.dim_y()],
            }
        }
    }
}

impl Curve for LocalPolyCurve {
    fn dim(&self) -> usize {
        self.data.dim_y()
    }
    fn horizon(&self) -> f64 {
        self.data.extent()
    }
    fn position(&self, t: f64) -> Vec<f64> {
        self.fit(t, false)
    }
    fn velocity(&self, t: f64) -> Vec<f64> {
        self.fit(t, true)
    }
}

/// Curve evaluators `u_hat`, `u_hat'` plus a precomputed evaluation grid on
/// `[0, T]` used for every continuous search over time.
#[derive(Clone)]
pub struct CurveEstimate {
    curve: Arc<dyn Curve>,
    resolution: usize,
    boundary_width: f64,
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
}

impl std::fmt::Debug for CurveEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurveEstimate")
            .field("dim", &self.curve.dim())
            .field("horizon", &self.curve.horizon())
            .field("resolution", &self.resolution)
            .field("boundary_width", &self.boundary_width)
            .field("grid", &self.times.len())
            .finish()
    }
}

impl CurveEstimate {
    /// `resolution` grid points per unit time; `boundary_width` marks the
    /// segments `[0, w)` and `(T - w, T]` as boundary.
    pub fn new(curve: Arc<dyn Curve>, resolution: usize, boundary_width: f64) -> Result<Self> {
        let horizon = curve.horizon();
        if !(horizon > 0.0 && horizon.is_finite()) || resolution == 0 {
            return Err(Error::InvalidInput("curve needs a positive horizon and resolution".into()));
        }
        let cells = ((resolution as f64 * horizon).ceil() as usize).max(1);
        let times: Vec<f64> = (0..=cells).map(|k| horizon * k as f64 / cells as f64).collect();
        let (points, velocities): (Vec<_>, Vec<_>) =
            times.par_iter().map(|&t| (curve.position(t), curve.velocity(t))).unzip();
        Ok(CurveEstimate { curve, resolution, boundary_width, times, points, velocities })
    }

    pub fn exact(curve: ExactCurve, resolution: usize) -> Result<Self> {
        Self::new(Arc::new(curve), resolution, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.curve.dim()
    }

    pub fn horizon(&self) -> f64 {
        self.curve.horizon()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn position(&self, t: f64) -> Vec<f64> {
        self.curve.position(t)
    }

    pub fn velocity(&self, t: f64) -> Vec<f64> {
        self.curve.velocity(t)
    }

    pub fn grid_times(&self) -> &[f64] {
        &self.times
    }

    pub fn grid_points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn grid_velocities(&self) -> &[Vec<f64>] {
        &self.velocities
    }

    pub fn boundary_width(&self) -> f64 {
        self.boundary_width
    }

    pub fn is_boundary(&self, t: f64) -> bool {
        t < self.boundary_width || t > self.horizon() - self.boundary_width
    }
}

/// Bandwidth and grid settings for [`fit_curve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFitConfig {
    pub kernel: Kernel,
    pub mode: BandwidthMode,
    /// Multiplier of the plug-in rule.
    pub constant: f64,
    /// Noise level used by the plug-in rule.
    pub sigma: f64,
    /// Smoothness constant of the curve class.
    pub smoothness: f64,
    /// Fixed bandwidth overriding the plug-in rule.
    pub bandwidth: Option<f64>,
    /// Evaluation grid points per bandwidth length of time.
    pub grid_per_bandwidth: usize,
}

impl Default for CurveFitConfig {
    fn default() -> Self {
        CurveFitConfig {
            kernel: Kernel::Epanechnikov,
            mode: BandwidthMode::SupNorm,
            constant: 1.0,
            sigma: 0.0,
            smoothness: 1.0,
            bandwidth: None,
            grid_per_bandwidth: 16,
        }
    }
}

/// `beta! * max_k L_k^(beta + 1)`, the smoothness constant of solutions of
/// `u' = f(u)` viewed as curves of smoothness `beta + 1`.
pub fn snake_smoothness_constant(f: &VectorField, beta: usize) -> f64 {
    let b = f.derivative_bounds();
    let top = b[1..=beta.min(f.beta())].iter().cloned().fold(0.0f64, f64::max);
    let fact: f64 = (1..=beta).map(|k| k as f64).product();
    fact * top.powi(beta as i32 + 1)
}

/// Degree-`beta` local polynomial estimates of the solution (`s = 0`) and its
/// velocity (`s = 1`). Without an explicit bandwidth the sup-norm plug-in rule
/// for smoothness `beta + 1` in one dimension is used; with zero noise the
/// rule degenerates and `(beta + 2)` times the largest time gap is used
/// instead. Every bandwidth is floored at `(beta + 1)` largest gaps so that
/// interior windows hold enough points.
pub fn fit_curve(data: &SnakeDataset, beta: usize, cfg: &CurveFitConfig) -> Result<CurveEstimate> {
    let n = data.times.len();
    if n < beta + 2 {
        return Err(Error::InvalidInput(format!("curve fit of degree {beta} needs at least {} observations", beta + 2)));
    }
    let horizon = *data.times.last().unwrap();
    let mut gap = data.times[0];
    for w in data.times.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    let h = match cfg.bandwidth {
        Some(h) => h,
        None if cfg.sigma > 0.0 => {
            optimal_bandwidth(n, 1, beta + 1, cfg.sigma, horizon, cfg.smoothness, cfg.mode, cfg.constant)?
        }
        None => (beta + 2) as f64 * gap,
    };
    let h = h.max((beta + 1) as f64 * gap);
    let pts: Vec<f64> = data.times.clone();
    let ys: Vec<f64> = data.observations.iter().flatten().cloned().collect();
    let reg = RegressionData::from_flat(1, data.d, pts, ys, horizon)?;
    let curve = LocalPolyCurve { data: reg, degree: beta, bandwidth: h, kernel: cfg.kernel };
    let resolution = ((cfg.grid_per_bandwidth.max(1) as f64) / h).ceil().max(1.0) as usize;
    CurveEstimate::new(Arc::new(curve), resolution, h)
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Nearest-neighbour time `argmin_t |u_hat(t) - x|`: grid minimum with ties
/// broken towards the smallest time, refined by golden-section search on the
/// two neighbouring grid cells. The grid time is kept unless the refined
/// time is strictly closer.
pub fn nn_time(curve: &CurveEstimate, x: &[f64]) -> f64 {
    let pts = curve.grid_points();
    let times = curve.grid_times();
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, p) in pts.iter().enumerate() {
        let d = crate::linalg::dist_sq(p, x);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    if best_d == 0.0 {
        return times[best];
    }
    let mut a = times[best.saturating_sub(1)];
    let mut b = times[(best + 1).min(times.len() - 1)];
    let phi = |t: f64| crate::linalg::dist_sq(&curve.position(t), x);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    for _ in 0..60 {
        if (b - a) <= 1e-12 * curve.horizon().max(1.0) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = phi(d);
        }
    }
    let (t_ref, f_ref) = if fc <= fd { (c, fc) } else { (d, fd) };
    if f_ref < best_d {
        t_ref
    } else {
        times[best]
    }
}

/// `sup_{x in X} min_k |u(t_k) - x|` over the evaluation grid.
pub fn delta_nn(curve: &CurveEstimate, samples: &[Vec<f64>]) -> f64 {
    samples
        .par_iter()
        .map(|x| {
            curve
                .grid_points()
                .iter()
                .map(|p| crate::linalg::dist_sq(p, x))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

/// Lattice of `per_axis^d` points spanning the box `[lower, upper]`.
pub fn box_samples(lower: &[f64], upper: &[f64], per_axis: usize) -> Vec<Vec<f64>> {
    let d = lower.len();
    let m = per_axis.max(2);
    (0..m.pow(d as u32))
        .map(|code| {
            let mut c = code;
            (0..d)
                .map(|j| {
                    let k = c % m;
                    c /= m;
                    lower[j] + (upper[j] - lower[j]) * k as f64 / (m - 1) as f64
                })
                .collect()
        })
        .collect()
}
