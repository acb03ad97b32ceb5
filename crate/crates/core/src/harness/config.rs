use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localpoly::Kernel;
use crate::odeflow::{field, FlowConfig, NoiseKind, VectorField};
use crate::snake::StencilConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "stubble-lip")]
    StubbleLip,
    #[serde(rename = "stubble-gen")]
    StubbleGen,
    #[serde(rename = "snake-lip")]
    SnakeLip,
    #[serde(rename = "snake-gen")]
    SnakeGen,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::StubbleLip => "stubble-lip",
            Model::StubbleGen => "stubble-gen",
            Model::SnakeLip => "snake-lip",
            Model::SnakeGen => "snake-gen",
        }
    }

    pub fn parse(s: &str) -> Option<Model> {
        [Model::StubbleLip, Model::StubbleGen, Model::SnakeLip, Model::SnakeGen].into_iter().find(|m| m.name() == s)
    }

    pub fn is_snake(&self) -> bool {
        matches!(self, Model::SnakeLip | Model::SnakeGen)
    }

    pub fn is_lipschitz(&self) -> bool {
        matches!(self, Model::StubbleLip | Model::SnakeLip)
    }
}

/// How the time step scales with the sample size; selects the reference rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Stubble with `dt` independent of `n`.
    FixedStep,
    /// Snake with `T = n dt` independent of `n`.
    FixedHorizon,
    /// `dt` shrinking with `n` at the bias-variance balancing rate.
    Balanced,
}

/// Time step as a function of the sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum DtRule {
    Fixed { dt: f64 },
    /// `dt = scale * n^exponent`.
    Power { scale: f64, exponent: f64 },
    /// `dt = horizon / n`, for a single trajectory of fixed length.
    Horizon { horizon: f64 },
}

impl DtRule {
    pub fn dt(&self, n: usize) -> f64 {
        match *self {
            DtRule::Fixed { dt } => dt,
            DtRule::Power { scale, exponent } => scale * (n as f64).powf(exponent),
            DtRule::Horizon { horizon } => horizon / n as f64,
        }
    }
}

/// Where the estimate is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum QuerySet {
    Points { points: Vec<Vec<f64>> },
    /// Lattice of `per_axis^d` points.
    Box { lower: Vec<f64>, upper: Vec<f64>, per_axis: usize },
    /// `count` points at distance `radius` from the true trajectory (snake models only).
    Tube { radius: f64, count: usize },
}

/// Estimator knobs; everything defaults to the plug-in choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    /// Multiplier of the plug-in bandwidth.
    pub bandwidth_constant: f64,
    /// Fixed bandwidth, bypassing the plug-in rule.
    pub bandwidth: Option<f64>,
    pub kernel: Kernel,
    /// Stencil search constants for `snake-gen`.
    pub stencil: Option<StencilConfig>,
    /// Fall back to the nearest-neighbour estimate when no stencil is admissible.
    pub fallback: bool,
    /// Curve evaluation grid points per bandwidth.
    pub grid_per_bandwidth: usize,
}

impl Default for Overrides {
    fn default() -> Self {
        Overrides {
            bandwidth_constant: 1.0,
            bandwidth: None,
            kernel: Kernel::Epanechnikov,
            stencil: None,
            fallback: true,
            grid_per_bandwidth: 16,
        }
    }
}

/// A full Monte Carlo rate study. Every key is documented in the README.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    /// Built-in field name, see [`field::BUILTIN_FIELDS`].
    pub field: String,
    pub d: usize,
    pub beta: usize,
    pub sigma: f64,
    #[serde(default = "default_noise")]
    pub noise: NoiseKind,
    /// Sample sizes, strictly increasing.
    pub ns: Vec<usize>,
    pub dt: DtRule,
    pub replicates: usize,
    pub seed: u64,
    pub queries: QuerySet,
    /// Initial condition of the snake trajectory.
    #[serde(default)]
    pub x1: Option<Vec<f64>>,
    pub regime: Regime,
    /// Allowed gap between fitted and reference slope for the pass flag.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub flow: FlowConfig,
}

fn default_noise() -> NoiseKind {
    NoiseKind::Gaussian
}

fn default_tolerance() -> f64 {
    0.1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The field with its smoothness claim truncated to `beta`.
    pub fn vector_field(&self) -> Result<VectorField> {
        field::by_name(&self.field, self.d)?.with_beta(self.beta)
    }

    pub fn stencil_config(&self) -> StencilConfig {
        self.overrides.stencil.clone().unwrap_or_else(|| StencilConfig::for_beta(self.beta, self.d))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.d == 0 || self.beta == 0 {
            return bad("d and beta must be positive".into());
        }
        if self.ns.is_empty() || self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n grid must be non-empty and strictly increasing".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be finite and nonnegative".into());
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be nonnegative".into());
        }
        if self.model.is_lipschitz() && self.beta != 1 {
            return Err(Error::UnsupportedCombination(format!("{} is the beta = 1 estimator", self.model.name())));
        }
        let f = self.vector_field()?;
        self.flow.validate()?;
        for &n in &self.ns {
            let dt = self.dt.dt(n);
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt rule gives {dt} at n = {n}"));
            }
        }
        let o = &self.overrides;
        if !(o.bandwidth_constant > 0.0) || o.bandwidth.is_some_and(|h| !(h > 0.0)) || o.grid_per_bandwidth == 0 {
            return bad("bandwidth overrides must be positive".into());
        }
        if self.model == Model::SnakeGen {
            self.stencil_config().validate(self.d)?;
        }
        if self.model.is_snake() {
            match &self.x1 {
                Some(x) if x.len() == self.d => {
                    if !f.domain().contains(x) {
                        return bad("x1 lies outside the field's certified box".into());
                    }
                }
                _ => return bad(format!("snake models need x1 of length {}", self.d)),
            }
            if self.ns[0] < self.beta + 2 {
                return bad(format!("snake curve fits need n >= {}", self.beta + 2));
            }
        } else {
            if matches!(self.dt, DtRule::Horizon { .. }) {
                return bad("the horizon dt rule applies to snake models".into());
            }
            if self.ns[0] < 2 * self.beta {
                return bad("stubble needs at least two trajectories".into());
            }
        }
        match &self.queries {
            QuerySet::Points { points } => {
                if points.is_empty() || points.iter().any(|p| p.len() != self.d) {
                    return bad(format!("query points must be non-empty with length {}", self.d));
                }
            }
            QuerySet::Box { lower, upper, per_axis } => {
                if lower.len() != self.d || upper.len() != self.d || *per_axis < 2 {
                    return bad("box query needs lower/upper of length d and per_axis >= 2".into());
                }
                if lower.iter().zip(upper).any(|(a, b)| !(a < b)) {
                    return bad("box query needs lower < upper".into());
                }
            }
            QuerySet::Tube { radius, count } => {
                if !self.model.is_snake() {
                    return bad("tube queries apply to snake models".into());
                }
                if !(*radius >= 0.0) || *count == 0 {
                    return bad("tube query needs radius >= 0 and count >= 1".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> ExperimentConfig {
        ExperimentConfig {
            model: Model::StubbleLip,
            field: "constant".into(),
            d: 1,
            beta: 1,
            sigma: 0.0,
            noise: NoiseKind::Gaussian,
            ns: vec![16, 32, 64],
            dt: DtRule::Power { scale: 1.0, exponent: -0.2 },
            replicates: 2,
            seed: 1,
            queries: QuerySet::Points { points: vec![vec![0.5]] },
            x1: None,
            regime: Regime::Balanced,
            tolerance: 0.1,
            overrides: Overrides::default(),
            flow: FlowConfig::default(),
        }
    }

    #[test]
    fn json_round_trip() {
        let cfg = sample();
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn minimal_json_uses_defaults() {
        let text = r#"{"model":"snake-lip","field":"rotation","d":2,"beta":1,"sigma":0.05,
            "ns":[1024,2048],"dt":{"rule":"horizon","horizon":6.283185307179586},"replicates":3,"seed":7,
            "queries":{"kind":"tube","radius":0.02,"count":50},"x1":[1.0,0.0],"regime":"fixed-horizon"}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.overrides, Overrides::default());
        assert!((cfg.dt.dt(1024) - std::f64::consts::TAU / 1024.0).abs() < 1e-18);
    }

    #[test]
    fn rejects_unknown_keys() {
        let mut v: serde_json::Value = serde_json::from_str(&sample().to_json()).unwrap();
        v["bogus"] = serde_json::json!(1);
        assert!(ExperimentConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn validation() {
        sample().validate().unwrap();
        let mut c = sample();
        c.ns = vec![32, 16, 64];
        assert!(c.validate().is_err());
        let mut c = sample();
        c.replicates = 0;
        assert!(c.validate().is_err());
        let mut c = sample();
        c.field = "nope".into();
        assert!(matches!(c.validate(), Err(Error::UnknownField(_))));
        let mut c = sample();
        c.beta = 2;
        assert!(matches!(c.validate(), Err(Error::UnsupportedCombination(_))));
        let mut c = sample();
        c.model = Model::SnakeLip;
        assert!(c.validate().is_err());
    }
}
