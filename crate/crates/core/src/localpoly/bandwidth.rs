use serde::{Deserialize, Serialize};

use super::fit::{lp_estimate, LocalPolyFit, RegressionData};
use super::kernel::Kernel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthMode {
    /// Balances pointwise squared bias and variance.
    Pointwise,
    /// Adds the `log n` factor needed for sup-norm control.
    SupNorm,
}

/// Rate-optimal bandwidth for a smoothness-`beta` class with constant `L`:
/// `C (sigma^2 T^d / (L^2 n))^(1/(2 beta + d))` in pointwise mode, with an
/// extra factor `log n` inside the parentheses in sup-norm mode.
#[allow(clippy::too_many_arguments)]
pub fn optimal_bandwidth(
    n: usize,
    d: usize,
    beta: usize,
    sigma: f64,
    extent: f64,
    lipschitz: f64,
    mode: BandwidthMode,
    constant: f64,
) -> Result<f64> {
    if n < 2 || d == 0 || beta == 0 {
        return Err(Error::InvalidInput("bandwidth needs n >= 2, d >= 1, beta >= 1".into()));
    }
    if !(sigma > 0.0 && extent > 0.0 && lipschitz > 0.0 && constant > 0.0) {
        return Err(Error::InvalidInput("bandwidth inputs must be positive".into()));
    }
    let n_f = n as f64;
    let mut ratio = sigma * sigma * extent.powi(d as i32) / (lipschitz * lipschitz * n_f);
    if mode == BandwidthMode::SupNorm {
        ratio *= n_f.ln();
    }
    Ok(constant * ratio.powf(1.0 / (2 * beta + d) as f64))
}

/// Hold-out search over `candidates`: every `stride`-th design point is held
/// out, the rest is used for fitting, and the bandwidth with the smallest
/// mean squared prediction error wins. Candidates for which some held-out
/// point has a singular design are skipped.
pub fn pilot_bandwidth(
    data: &RegressionData,
    degree: usize,
    kernel: Kernel,
    candidates: &[f64],
    stride: usize,
) -> Result<f64> {
    if stride < 2 {
        return Err(Error::InvalidInput("hold-out stride must be at least 2".into()));
    }
    let n = data.len();
    let (mut train_x, mut train_y, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        if i % stride == stride / 2 {
            test.push(i);
        } else {
            train_x.extend_from_slice(data.point(i));
            train_y.extend_from_slice(data.target(i));
        }
    }
    let train = RegressionData::from_flat(data.dim_x(), data.dim_y(), train_x, train_y, data.extent())?;
    let mut best: Option<(f64, f64)> = None;
    for &h in candidates {
        let fit = LocalPolyFit::new(degree, h);
        let mut sse = 0.0;
        let mut ok = true;
        for &i in &test {
            match lp_estimate(data.point(i), &train, &fit, kernel) {
                Ok(est) => {
                    sse += est.iter().zip(data.target(i)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                }
                Err(Error::SingularDesign { .. }) => {
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok && best.is_none_or(|(_, s)| sse < s) {
            best = Some((h, sse));
        }
    }
    best.map(|(h, _)| h)
        .ok_or_else(|| Error::InvalidInput("no pilot bandwidth candidate gave a nonsingular fit".into()))
}
