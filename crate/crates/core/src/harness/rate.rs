use serde::{Deserialize, Serialize};

use super::config::{Model, Regime};
use crate::error::{Error, Result};

/// Exact rational exponent `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i64;
        let s = if den < 0 { -1 } else { 1 };
        Rational { num: s * num / g, den: s * den / g }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Squared-error rate `n^exponent (log n)^log_power`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalRate {
    pub exponent: Rational,
    pub log_power: Rational,
    /// Short tag naming the regime the rate belongs to.
    pub source: String,
}

impl TheoreticalRate {
    fn new(exponent: Rational, log_power: Rational, source: &str) -> Self {
        debug_assert!(exponent.num < 0);
        TheoreticalRate { exponent, log_power, source: source.to_string() }
    }

    /// Exponent of the root-mean-squared (or sup-norm) error, half the squared one.
    pub fn rmse_exponent(&self) -> f64 {
        0.5 * self.exponent.value()
    }

    /// Error-scale curve `n^(e/2) (log n)^(p/2)`.
    pub fn rmse_shape(&self, n: f64) -> f64 {
        n.powf(self.rmse_exponent()) * n.ln().powf(0.5 * self.log_power.value())
    }
}

/// Rate exponent of the squared error for `model` in `regime`.
///
/// * stubble, fixed step: `n^(-2b/(2b+d))` (the `dt^(2b)` bias does not decay with `n`).
/// * stubble, balanced `dt ~ n^(-1/(2(b+1)+d))`: `n^(-2b/(2(b+1)+d))`.
/// * snake, fixed horizon: `(log n / n)^(2b/(2b+3))`, up to the coverage term `delta^(2b)`.
/// * snake, balanced: `(n / log n)^(-2b/(2(b+1)+d))`.
///
/// The Lipschitz variants are the `beta = 1` estimators.
pub fn reference_rate(model: Model, d: usize, beta: usize, regime: Regime) -> Result<TheoreticalRate> {
    if d == 0 || beta == 0 {
        return Err(Error::UnsupportedCombination(format!("d = {d}, beta = {beta}")));
    }
    if model.is_lipschitz() && beta != 1 {
        return Err(Error::UnsupportedCombination(format!("{} requires beta = 1, got {beta}", model.name())));
    }
    let (b, d) = (beta as i64, d as i64);
    let zero = Rational::new(0, 1);
    Ok(match (model.is_snake(), regime) {
        (false, Regime::FixedStep) => TheoreticalRate::new(Rational::new(-2 * b, 2 * b + d), zero, "stubble/fixed-step"),
        (false, Regime::Balanced) => {
            TheoreticalRate::new(Rational::new(-2 * b, 2 * (b + 1) + d), zero, "stubble/balanced")
        }
        (true, Regime::FixedHorizon) => {
            let e = Rational::new(-2 * b, 2 * b + 3);
            TheoreticalRate::new(e, Rational::new(2 * b, 2 * b + 3), "snake/fixed-horizon")
        }
        (true, Regime::Balanced) => {
            let e = Rational::new(-2 * b, 2 * (b + 1) + d);
            TheoreticalRate::new(e, Rational::new(2 * b, 2 * (b + 1) + d), "snake/balanced")
        }
        (snake, regime) => {
            let family = if snake { "snake" } else { "stubble" };
            return Err(Error::UnsupportedCombination(format!("{family} has no {regime:?} regime")));
        }
    })
}

/// Squared sup-norm risk shape of the curve estimate `u_hat` for
/// smoothness-`beta + 1` curves: `(log n / n)^(2(b+1)/(2b+3))`.
pub fn curve_position_rate(beta: usize) -> TheoreticalRate {
    let b = beta as i64;
    let e = Rational::new(2 * (b + 1), 2 * b + 3);
    TheoreticalRate::new(Rational::new(-e.num, e.den), e, "curve/position")
}

/// Squared sup-norm risk shape of the velocity estimate: `(log n / n)^(2b/(2b+3))`.
pub fn curve_velocity_rate(beta: usize) -> TheoreticalRate {
    let b = beta.max(1) as i64;
    let e = Rational::new(2 * b, 2 * b + 3);
    TheoreticalRate::new(Rational::new(-e.num, e.den), e, "curve/velocity")
}

/// Ordinary least squares of `log error` on `log n`; returns `(slope, intercept)`.
pub fn fit_rate(ns: &[f64], errors: &[f64]) -> Result<(f64, f64)> {
    if ns.len() != errors.len() {
        return Err(Error::InvalidInput("ns and errors differ in length".into()));
    }
    if ns.len() < 3 {
        return Err(Error::InvalidInput(format!("rate fit needs at least 3 points, got {}", ns.len())));
    }
    if let Some((i, &v)) = errors.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::NonPositiveError { index: i, value: v });
    }
    if ns.iter().any(|n| !(*n > 0.0)) {
        return Err(Error::InvalidInput("sample sizes must be positive".into()));
    }
    let xs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("rate fit needs at least two distinct sample sizes".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
