use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::integrate::Trajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Independent `N(0, sigma^2)` per component.
    Gaussian,
    /// Independent `U(-sigma sqrt 3, sigma sqrt 3)` per component (variance `sigma^2`).
    UniformBounded,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        NoiseSpec { kind: NoiseKind::Gaussian, sigma, seed }
    }

    pub fn none() -> Self {
        NoiseSpec { kind: NoiseKind::None, sigma: 0.0, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidInput("noise sigma must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Effective per-component standard deviation (zero for `none`).
    pub fn effective_sigma(&self) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            _ => self.sigma,
        }
    }

    /// RNG stream for one observation; depends only on `(seed, traj_id, obs_idx)`.
    pub fn stream(&self, traj_id: u64, obs_idx: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ splitmix64(traj_id)));
        rng.set_stream(obs_idx);
        rng
    }

    /// Adds one noise draw to `y` in place.
    pub fn perturb(&self, y: &mut [f64], traj_id: u64, obs_idx: u64) {
        if self.kind == NoiseKind::None || self.sigma == 0.0 {
            return;
        }
        let mut rng = self.stream(traj_id, obs_idx);
        match self.kind {
            NoiseKind::Gaussian => {
                for v in y.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v += self.sigma * z;
                }
            }
            NoiseKind::UniformBounded => {
                let a = self.sigma * 3f64.sqrt();
                for v in y.iter_mut() {
                    *v += rng.random_range(-a..a);
                }
            }
            NoiseKind::None => {}
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One noisy sample `Y = U(f, x_traj, t) + eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub traj_id: u64,
    pub obs_idx: u64,
    pub t: f64,
    pub y: Vec<f64>,
}

/// Noisy observations of `traj` at indices `1..`. The state at index 0 is the
/// known initial condition and is not emitted.
pub fn add_noise(traj: &Trajectory, spec: &NoiseSpec, traj_id: u64) -> Vec<Observation> {
    traj.times
        .iter()
        .zip(&traj.states)
        .enumerate()
        .skip(1)
        .map(|(i, (t, s))| {
            let mut y = s.clone();
            spec.perturb(&mut y, traj_id, i as u64);
            Observation { traj_id, obs_idx: i as u64, t: *t, y }
        })
        .collect()
}
