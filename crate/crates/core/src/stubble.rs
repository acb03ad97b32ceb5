//! Many short trajectories from a uniform grid of known initial conditions.
//!
//! Each trajectory `j` is observed at `i dt` for `i = 1..beta`. The increment
//! maps `x -> U(f, x, i dt) - x` are estimated by regression on the
//! initial conditions, interpolated in time through the origin, and `f(x0)`
//! is the time derivative of that interpolant at zero.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::localpoly::{lp_estimate, optimal_bandwidth, uniform_grid, BandwidthMode, Kernel, LocalPolyFit, RegressionData};
use crate::odeflow::{sample_trajectory, FlowConfig, NoiseSpec, Observation, VectorField};
use crate::polyinterp::{derivative_at, interp_univariate};

#[derive(Debug, Clone, PartialEq)]
pub struct StubbleDataset {
    pub d: usize,
    pub beta: usize,
    pub dt: f64,
    /// Initial conditions `x_j` in `[0, 1]^d`.
    pub initials: Vec<Vec<f64>>,
    /// `observations[j][i - 1] = Y_{j,i}` for `i = 1..beta`.
    pub observations: Vec<Vec<Vec<f64>>>,
}

impl StubbleDataset {
    /// Number of trajectories `m`.
    pub fn trajectories(&self) -> usize {
        self.initials.len()
    }

    /// Total observation count `n = m beta`.
    pub fn sample_size(&self) -> usize {
        self.initials.len() * self.beta
    }

    /// Flattened observation records (trajectory ids follow `initials`).
    pub fn to_observations(&self) -> Vec<Observation> {
        let mut out = Vec::with_capacity(self.sample_size());
        for (j, obs) in self.observations.iter().enumerate() {
            for (i, y) in obs.iter().enumerate() {
                out.push(Observation {
                    traj_id: j as u64,
                    obs_idx: (i + 1) as u64,
                    t: (i + 1) as f64 * self.dt,
                    y: y.clone(),
                });
            }
        }
        out
    }

    /// Rebuilds a dataset from records; every trajectory needs indices `1..=beta`.
    pub fn from_observations(initials: Vec<Vec<f64>>, beta: usize, dt: f64, obs: &[Observation]) -> Result<Self> {
        let d = initials.first().map(|x| x.len()).unwrap_or(0);
        let mut observations = vec![vec![Vec::new(); beta]; initials.len()];
        let mut seen = vec![vec![false; beta]; initials.len()];
        for o in obs {
            let j = o.traj_id as usize;
            let i = o.obs_idx as usize;
            if j >= initials.len() || i == 0 || i > beta || o.y.len() != d {
                return Err(Error::InvalidInput(format!(
                    "observation (traj {}, idx {}) does not fit the stubble layout",
                    o.traj_id, o.obs_idx
                )));
            }
            observations[j][i - 1] = o.y.clone();
            seen[j][i - 1] = true;
        }
        if seen.iter().flatten().any(|s| !s) {
            return Err(Error::InvalidInput("missing stubble observations".into()));
        }
        Ok(StubbleDataset { d, beta, dt, initials, observations })
    }

    /// Regression data `(x_j, Y_{j,i} - x_j)` for horizon `i` in `1..=beta`.
    pub fn increments(&self, i: usize) -> Result<RegressionData> {
        if i == 0 || i > self.beta {
            return Err(Error::InvalidInput(format!("horizon {i} outside 1..={}", self.beta)));
        }
        let mut pts = Vec::with_capacity(self.trajectories() * self.d);
        let mut ys = Vec::with_capacity(self.trajectories() * self.d);
        for (x, obs) in self.initials.iter().zip(&self.observations) {
            pts.extend_from_slice(x);
            ys.extend(obs[i - 1].iter().zip(x).map(|(y, a)| y - a));
        }
        RegressionData::from_flat(self.d, self.d, pts, ys, 1.0)
    }
}

/// Noise-free states `U(f, x_j, i dt)`, `i = 1..beta`, on the grid
/// `{k / n0 : k = 1..n0}^d`. Reports trajectories that leave the box on
/// which the field's bounds are certified.
pub fn clean_stubble(f: &VectorField, n0: usize, dt: f64, beta: usize, cfg: &FlowConfig) -> Result<StubbleDataset> {
    if n0 < 2 || beta == 0 || !(dt > 0.0) {
        return Err(Error::InvalidInput("stubble needs n0 >= 2, beta >= 1, dt > 0".into()));
    }
    let d = f.dim();
    let initials = uniform_grid(d, n0, 1.0);
    let times: Vec<f64> = (0..=beta).map(|i| i as f64 * dt).collect();
    let observations = initials
        .par_iter()
        .map(|x| {
            let tr = sample_trajectory(f, x, &times, cfg)?;
            if let Some(s) = tr.states.iter().find(|s| !f.domain().contains(s)) {
                return Err(Error::InvalidInput(format!(
                    "trajectory from {x:?} leaves the certified box of '{}' at {s:?}",
                    f.name()
                )));
            }
            Ok(tr.states[1..].to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StubbleDataset { d, beta, dt, initials, observations })
}

/// Adds noise to a clean dataset; trajectory `j` uses stream id `j`.
pub fn noisy_stubble(clean: &StubbleDataset, noise: &NoiseSpec) -> StubbleDataset {
    let mut out = clean.clone();
    for (j, obs) in out.observations.iter_mut().enumerate() {
        for (i, y) in obs.iter_mut().enumerate() {
            noise.perturb(y, j as u64, (i + 1) as u64);
        }
    }
    out
}

/// `m = n0^d` trajectories with `beta` noisy observations each.
pub fn generate_stubble(
    f: &VectorField,
    n0: usize,
    dt: f64,
    beta: usize,
    noise: &NoiseSpec,
    cfg: &FlowConfig,
) -> Result<StubbleDataset> {
    noise.validate()?;
    Ok(noisy_stubble(&clean_stubble(f, n0, dt, beta, cfg)?, noise))
}

/// Black-box regressor `R^d -> R^d` used for the increment maps.
pub trait IncrementRegressor: Send + Sync {
    fn estimate(&self, x0: &[f64], data: &RegressionData) -> Result<Vec<f64>>;
}

/// Componentwise local polynomial regressor with a fixed bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPolyRegressor {
    pub degree: usize,
    pub bandwidth: f64,
    pub kernel: Kernel,
}

impl LocalPolyRegressor {
    /// Degree `beta - 1`, as in the general Stubble estimator.
    pub fn for_beta(beta: usize, bandwidth: f64, kernel: Kernel) -> Self {
        LocalPolyRegressor { degree: beta.saturating_sub(1), bandwidth, kernel }
    }
}

impl IncrementRegressor for LocalPolyRegressor {
    fn estimate(&self, x0: &[f64], data: &RegressionData) -> Result<Vec<f64>> {
        lp_estimate(x0, data, &LocalPolyFit::new(self.degree, self.bandwidth), self.kernel)
    }
}

/// Plug-in bandwidth for the increment regression. The increment maps lie
/// in a smoothness-`beta` class whose constant scales with `dt`, so the
/// pointwise rule is evaluated with `L = L_1 dt` on `m` design points.
pub fn stubble_bandwidth(m: usize, d: usize, beta: usize, sigma: f64, dt: f64, l1: f64, constant: f64) -> Result<f64> {
    optimal_bandwidth(m, d, beta, sigma, 1.0, l1 * dt, BandwidthMode::Pointwise, constant)
}

/// Scaled increment estimator: Nadaraya-Watson fit of `Y_j - x_j` at `x0`,
/// divided by `dt`. Uses the first horizon only.
pub fn estimate_lipschitz(x0: &[f64], data: &StubbleDataset, h: f64, kernel: Kernel) -> Result<Vec<f64>> {
    let inc = data.increments(1)?;
    let ups = lp_estimate(x0, &inc, &LocalPolyFit::new(0, h), kernel)?;
    Ok(ups.iter().map(|u| u / data.dt).collect())
}

/// Increment-interpolation estimator: regress each horizon, interpolate
/// `(i dt, Upsilon_i(x0))` for `i = 0..beta` with `Upsilon_0 = 0`, and return
/// the first time derivative at 0.
pub fn estimate_general(x0: &[f64], data: &StubbleDataset, regressor: &dyn IncrementRegressor) -> Result<Vec<f64>> {
    let mut ts = vec![0.0];
    let mut ys = vec![vec![0.0; data.d]];
    for i in 1..=data.beta {
        ts.push(i as f64 * data.dt);
        ys.push(regressor.estimate(x0, &data.increments(i)?)?);
    }
    let polys = interp_univariate(&ts, &ys)?;
    Ok(polys.iter().map(|p| derivative_at(p, 1, 0.0)).collect())
}
