use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Model, Overrides, QuerySet};
use super::rate::{fit_rate, reference_rate, TheoreticalRate};
use crate::error::{Error, Result};
use crate::linalg::{dist, dist_sq};
use crate::localpoly::BandwidthMode;
use crate::odeflow::{sample_trajectory, NoiseSpec, VectorField};
use crate::snake::{self, box_samples, fit_curve, snake_smoothness_constant, CurveFitConfig, Provenance, SnakeDataset};
use crate::stubble::{self, stubble_bandwidth, LocalPolyRegressor, StubbleDataset};

/// Share of failed replicates above which a sample size is rejected.
pub const MAX_FAILURE_SHARE: f64 = 0.2;

/// One Monte Carlo replicate at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub n: usize,
    pub replicate: usize,
    /// RMSE over the query set (stubble) or sup-error (snake); `None` if any query failed.
    pub error: Option<f64>,
    /// Query points whose estimate failed.
    pub failures: usize,
    /// Snake queries answered by the nearest-neighbour fallback.
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    /// Realized sample size (the stubble grid rounds `n / beta` to a `d`-th power).
    pub n_eff: usize,
    pub mean: f64,
    pub stderr: f64,
    pub succeeded: usize,
    pub failed: usize,
    pub fallbacks: usize,
    /// Simulation-only coverage radius of the true trajectory over the query set.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub model: Model,
    pub rows: Vec<RateRow>,
    /// OLS slope of `log mean` on `log n_eff`; absent with fewer than 3 sizes.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub reference: TheoreticalRate,
    /// Error-scale exponent the slope is compared with.
    pub reference_exponent: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: RateReport,
    /// Sorted by `(n, replicate)`.
    pub results: Vec<ReplicateResult>,
}

/// Mean and standard error (sample standard deviation over `sqrt k`), summed in input order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

enum Prepared {
    Stubble { clean: StubbleDataset, bandwidth: f64 },
    Snake { clean: SnakeDataset, fit: CurveFitConfig },
}

struct Setup {
    data: Prepared,
    n_eff: usize,
    queries: Vec<Vec<f64>>,
    truths: Vec<Vec<f64>>,
    delta: Option<f64>,
}

/// Runs every replicate of every sample size. Clean data is generated once
/// per `n`; replicate `r` perturbs it with noise seed `seed + r`, so results
/// depend only on the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let f = cfg.vector_field()?;
    let reference = reference_rate(cfg.model, cfg.d, cfg.beta, cfg.regime)?;
    let mut rows = Vec::with_capacity(cfg.ns.len());
    let mut results = Vec::with_capacity(cfg.ns.len() * cfg.replicates);
    for &n in &cfg.ns {
        let setup = prepare(cfg, &f, n)?;
        let reps: Vec<ReplicateResult> =
            (0..cfg.replicates).into_par_iter().map(|r| replicate(cfg, &setup, n, r)).collect();
        let ok: Vec<f64> = reps.iter().filter_map(|r| r.error).collect();
        let failed = reps.len() - ok.len();
        if failed as f64 > MAX_FAILURE_SHARE * reps.len() as f64 {
            return Err(Error::ExperimentFailed { n, failed, total: reps.len() });
        }
        let (mean, stderr) = mean_stderr(&ok);
        rows.push(RateRow {
            n,
            n_eff: setup.n_eff,
            mean,
            stderr,
            succeeded: ok.len(),
            failed,
            fallbacks: reps.iter().map(|r| r.fallbacks).sum(),
            delta: setup.delta,
        });
        results.extend(reps);
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n_eff as f64).collect();
    let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let fitted = if rows.len() >= 3 { Some(fit_rate(&ns, &means)?) } else { None };
    let reference_exponent = reference.rmse_exponent();
    let pass = fitted.is_some_and(|(s, _)| (s - reference_exponent).abs() <= cfg.tolerance);
    let report = RateReport {
        model: cfg.model,
        rows,
        slope: fitted.map(|f| f.0),
        intercept: fitted.map(|f| f.1),
        reference,
        reference_exponent,
        tolerance: cfg.tolerance,
        pass,
    };
    Ok(ExperimentOutput { report, results })
}

fn prepare(cfg: &ExperimentConfig, f: &VectorField, n: usize) -> Result<Setup> {
    let dt = cfg.dt.dt(n);
    let o = &cfg.overrides;
    if cfg.model.is_snake() {
        let x1 = cfg.x1.as_ref().expect("validated");
        let clean = snake::clean_snake(f, x1, n, dt, cfg.beta, &cfg.flow)?;
        let queries = match &cfg.queries {
            QuerySet::Tube { radius, count } => tube_queries(f, x1, clean.horizon(), *radius, *count, cfg)?,
            other => fixed_queries(other),
        };
        let mut path = vec![x1.clone()];
        path.extend(clean.observations.iter().cloned());
        let delta = queries
            .iter()
            .map(|q| path.iter().map(|p| dist_sq(p, q)).fold(f64::INFINITY, f64::min).sqrt())
            .fold(0.0, f64::max);
        let fit = snake_fit_config(f, cfg.beta, noise_sigma(cfg), o);
        let truths = queries.iter().map(|q| f.eval(q)).collect();
        Ok(Setup { data: Prepared::Snake { clean, fit }, n_eff: n, queries, truths, delta: Some(delta) })
    } else {
        let n0 = ((n as f64 / cfg.beta as f64).powf(1.0 / cfg.d as f64).round() as usize).max(2);
        let clean = stubble::clean_stubble(f, n0, dt, cfg.beta, &cfg.flow)?;
        let bandwidth = match o.bandwidth {
            Some(h) => h,
            None => stubble_default_bandwidth(&clean, noise_sigma(cfg), f.lipschitz(), o.bandwidth_constant)?,
        };
        let queries = fixed_queries(&cfg.queries);
        let truths = queries.iter().map(|q| f.eval(q)).collect();
        let n_eff = clean.sample_size();
        Ok(Setup { data: Prepared::Stubble { clean, bandwidth }, n_eff, queries, truths, delta: None })
    }
}

/// Plug-in bandwidth of the increment regression, floored at `(beta + 1)`
/// grid spacings; with zero noise the floor itself is used.
pub fn stubble_default_bandwidth(data: &StubbleDataset, sigma: f64, l1: f64, constant: f64) -> Result<f64> {
    let m = data.trajectories();
    let n0 = (m as f64).powf(1.0 / data.d as f64).round().max(1.0);
    let floor = (data.beta + 1) as f64 / n0;
    if sigma > 0.0 {
        Ok(stubble_bandwidth(m, data.d, data.beta, sigma, data.dt, l1, constant)?.max(floor))
    } else {
        Ok(floor)
    }
}

/// Curve-fit settings for a field of known smoothness, honouring the overrides.
pub fn snake_fit_config(f: &VectorField, beta: usize, sigma: f64, o: &Overrides) -> CurveFitConfig {
    CurveFitConfig {
        kernel: o.kernel,
        mode: BandwidthMode::SupNorm,
        constant: o.bandwidth_constant,
        sigma,
        smoothness: snake_smoothness_constant(f, beta),
        bandwidth: o.bandwidth,
        grid_per_bandwidth: o.grid_per_bandwidth,
    }
}

fn noise_sigma(cfg: &ExperimentConfig) -> f64 {
    NoiseSpec { kind: cfg.noise, sigma: cfg.sigma, seed: 0 }.effective_sigma()
}

fn fixed_queries(q: &QuerySet) -> Vec<Vec<f64>> {
    match q {
        QuerySet::Points { points } => points.clone(),
        QuerySet::Box { lower, upper, per_axis } => box_samples(lower, upper, *per_axis),
        QuerySet::Tube { .. } => unreachable!("tube queries are built from the trajectory"),
    }
}

/// `u(t_k) + radius v_k` at `t_k = T (k + 1/2) / count`, with `v_k` uniform on
/// the unit sphere from a stream fixed by the experiment seed.
fn tube_queries(
    f: &VectorField,
    x1: &[f64],
    horizon: f64,
    radius: f64,
    count: usize,
    cfg: &ExperimentConfig,
) -> Result<Vec<Vec<f64>>> {
    let mut times = vec![0.0];
    times.extend((0..count).map(|k| horizon * (k as f64 + 0.5) / count as f64));
    let tr = sample_trajectory(f, x1, &times, &cfg.flow)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7475_6265);
    Ok(tr.states[1..]
        .iter()
        .map(|p| {
            let mut v: Vec<f64> = (0..p.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = crate::linalg::norm(&v).max(f64::MIN_POSITIVE);
            v.iter_mut().for_each(|c| *c *= radius / norm);
            p.iter().zip(&v).map(|(a, b)| a + b).collect()
        })
        .collect())
}

fn replicate(cfg: &ExperimentConfig, setup: &Setup, n: usize, r: usize) -> ReplicateResult {
    let noise = NoiseSpec { kind: cfg.noise, sigma: cfg.sigma, seed: cfg.seed.wrapping_add(r as u64) };
    let q = setup.queries.len();
    let mut errs = Vec::with_capacity(q);
    let mut failures = 0;
    let mut fallbacks = 0;
    match &setup.data {
        Prepared::Stubble { clean, bandwidth } => {
            let data = stubble::noisy_stubble(clean, &noise);
            let reg = LocalPolyRegressor::for_beta(cfg.beta, *bandwidth, cfg.overrides.kernel);
            for (x, truth) in setup.queries.iter().zip(&setup.truths) {
                let est = match cfg.model {
                    Model::StubbleLip => stubble::estimate_lipschitz(x, &data, *bandwidth, cfg.overrides.kernel),
                    _ => stubble::estimate_general(x, &data, &reg),
                };
                match est {
                    Ok(v) if v.iter().all(|c| c.is_finite()) => errs.push(dist(&v, truth)),
                    _ => failures += 1,
                }
            }
        }
        Prepared::Snake { clean, fit } => {
            let data = snake::noisy_snake(clean, &noise);
            match fit_curve(&data, cfg.beta, fit) {
                Err(_) => failures = q,
                Ok(curve) => {
                    let stencil = cfg.stencil_config();
                    for (x, truth) in setup.queries.iter().zip(&setup.truths) {
                        let est = match cfg.model {
                            Model::SnakeLip => Ok(snake::estimate_lipschitz(x, &curve)),
                            _ => snake::estimate_general(x, &curve, &stencil, cfg.overrides.fallback).map(|e| {
                                if e.provenance == Provenance::Fallback {
                                    fallbacks += 1;
                                }
                                e.value
                            }),
                        };
                        match est {
                            Ok(v) if v.iter().all(|c| c.is_finite()) => errs.push(dist(&v, truth)),
                            _ => failures += 1,
                        }
                    }
                }
            }
        }
    }
    let error = if failures > 0 {
        None
    } else if cfg.model.is_snake() {
        Some(errs.iter().cloned().fold(0.0, f64::max))
    } else {
        Some((errs.iter().map(|e| e * e).sum::<f64>() / q as f64).sqrt())
    };
    ReplicateResult { n, replicate: r, error, failures, fallbacks }
}
