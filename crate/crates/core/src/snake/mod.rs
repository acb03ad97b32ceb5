//! One long trajectory observed at equidistant times.
//!
//! The solution `u` and its velocity are reconstructed by local polynomial
//! regression in time ([`fit_curve`]). `f(x)` is then read off either at the
//! nearest point of the fitted curve ([`estimate_lipschitz`]) or by
//! interpolating the fitted velocities over a well-conditioned stencil of
//! curve points surrounding `x` ([`estimate_general`]).

pub mod curve;
pub mod stencil;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odeflow::{sample_trajectory, FlowConfig, NoiseSpec, VectorField};
use crate::polyinterp::{interp_multivariate, Stencil};

pub use curve::{
    box_samples, delta_nn, fit_curve, nn_time, snake_smoothness_constant, Curve, CurveEstimate, CurveFitConfig,
    ExactCurve, LocalPolyCurve,
};
pub use stencil::{is_estimable, select_stencil, verify_stencil, StencilConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SnakeDataset {
    pub d: usize,
    pub beta: usize,
    /// Known initial condition at time 0.
    pub x1: Vec<f64>,
    pub dt: f64,
    /// Observation times `t_1..t_n`, `t_n = T`.
    pub times: Vec<f64>,
    pub observations: Vec<Vec<f64>>,
}

impl SnakeDataset {
    pub fn horizon(&self) -> f64 {
        self.times.last().cloned().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Noise-free states `U(f, x1, i dt)` for `i = 1..n`, integrated by continuation.
pub fn clean_snake(f: &VectorField, x1: &[f64], n: usize, dt: f64, beta: usize, cfg: &FlowConfig) -> Result<SnakeDataset> {
    if n == 0 || !(dt > 0.0) {
        return Err(Error::InvalidInput("snake needs n >= 1 and dt > 0".into()));
    }
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    let tr = sample_trajectory(f, x1, &times, cfg)?;
    if let Some(s) = tr.states.iter().find(|s| !f.domain().contains(s)) {
        return Err(Error::InvalidInput(format!("trajectory leaves the certified box of '{}' at {s:?}", f.name())));
    }
    Ok(SnakeDataset {
        d: f.dim(),
        beta,
        x1: x1.to_vec(),
        dt,
        times: times[1..].to_vec(),
        observations: tr.states[1..].to_vec(),
    })
}

/// Adds noise; observation `i` uses stream `(0, i)`, matching
/// [`crate::odeflow::add_noise`] on the full trajectory.
pub fn noisy_snake(clean: &SnakeDataset, noise: &NoiseSpec) -> SnakeDataset {
    let mut out = clean.clone();
    for (i, y) in out.observations.iter_mut().enumerate() {
        noise.perturb(y, 0, (i + 1) as u64);
    }
    out
}

pub fn generate_snake(
    f: &VectorField,
    x1: &[f64],
    n: usize,
    dt: f64,
    beta: usize,
    noise: &NoiseSpec,
    cfg: &FlowConfig,
) -> Result<SnakeDataset> {
    noise.validate()?;
    Ok(noisy_snake(&clean_snake(f, x1, n, dt, beta, cfg)?, noise))
}

/// Observations as records for serialization (trajectory id 0).
pub fn snake_observations(data: &SnakeDataset) -> Vec<crate::odeflow::Observation> {
    data.times
        .iter()
        .zip(&data.observations)
        .enumerate()
        .map(|(i, (t, y))| crate::odeflow::Observation { traj_id: 0, obs_idx: (i + 1) as u64, t: *t, y: y.clone() })
        .collect()
}

/// `u_hat'(t_NN(x))`.
pub fn estimate_lipschitz(x: &[f64], curve: &CurveEstimate) -> Vec<f64> {
    curve.velocity(nn_time(curve, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Interpolated,
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnakeEstimate {
    pub value: Vec<f64>,
    pub provenance: Provenance,
    pub stencil: Option<Stencil>,
}

/// Interpolates the fitted velocities `u_hat'(tau_k)` at the stencil points
/// `u_hat(tau_k)` and evaluates at `x`. Without an admissible stencil the
/// nearest-neighbour estimate is returned when `fallback` is set.
pub fn estimate_general(x: &[f64], curve: &CurveEstimate, cfg: &StencilConfig, fallback: bool) -> Result<SnakeEstimate> {
    match select_stencil(curve, x, cfg) {
        Ok(st) => {
            let vels: Vec<Vec<f64>> = st.times.iter().map(|&t| curve.velocity(t)).collect();
            let value = interp_multivariate(&st.points, &vels, x);
            Ok(SnakeEstimate { value, provenance: Provenance::Interpolated, stencil: Some(st) })
        }
        Err(Error::NoStencilFound { .. }) if fallback => {
            Ok(SnakeEstimate { value: estimate_lipschitz(x, curve), provenance: Provenance::Fallback, stencil: None })
        }
        Err(e) => Err(e),
    }
}
