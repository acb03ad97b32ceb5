use super::fit::{design_matrix, LocalPolyFit, RegressionData};
use super::kernel::Kernel;
use crate::error::Result;

/// Empirical check of the covering and eigenvalue conditions of a design.
#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    /// Smallest `c` with `#{x_i in B(x, r)} / n <= max(1/n, c (r/T)^d)` over
    /// the probes and all radii; 0 when only the `1/n` branch is ever active.
    pub c_cvr: f64,
    /// True when no ball around any probe holds more than one point.
    pub one_over_n_branch: bool,
    /// Minimum of `lambda_min(B(x))` over the probes.
    pub min_lambda: f64,
    /// Probes with `lambda_min(B(x)) <= floor`, with their eigenvalue.
    pub flagged: Vec<(Vec<f64>, f64)>,
}

/// Probes a lattice of `probes_per_axis^d` cell centres of `[0, T]^d`.
///
/// For each probe the covering ratio is maximised at the sorted distances to
/// the design points, where the ball count jumps. `B(x)` is built with
/// `fit` (bandwidth and degree) and `kernel`, and probes whose smallest
/// eigenvalue does not exceed `floor` are flagged.
pub fn check_grid_assumptions(
    points: &[Vec<f64>],
    extent: f64,
    kernel: Kernel,
    fit: &LocalPolyFit,
    probes_per_axis: usize,
    floor: f64,
) -> Result<GridReport> {
    let d = points.first().map(|p| p.len()).unwrap_or(1);
    let n = points.len();
    let dummy: Vec<Vec<f64>> = vec![vec![0.0]; n];
    let data = RegressionData::new(points, &dummy, extent)?;
    let m = probes_per_axis.max(1);
    let total = m.pow(d as u32);
    let mut c_cvr = 0.0f64;
    let mut min_lambda = f64::INFINITY;
    let mut flagged = Vec::new();
    let mut probe = vec![0.0; d];
    for code in 0..total {
        let mut c = code;
        for p in probe.iter_mut() {
            *p = extent * ((c % m) as f64 + 0.5) / m as f64;
            c /= m;
        }
        let mut dists: Vec<f64> = points.iter().map(|p| crate::linalg::dist(p, &probe)).collect();
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut k = 0;
        while k < n {
            // Ball of radius dists[k] contains every point up to the last tie.
            let r = dists[k];
            let mut j = k;
            while j + 1 < n && dists[j + 1] == r {
                j += 1;
            }
            let count = j + 1;
            if count >= 2 {
                let ratio = if r > 0.0 {
                    (count as f64 / n as f64) * (extent / r).powi(d as i32)
                } else {
                    f64::INFINITY
                };
                c_cvr = c_cvr.max(ratio);
            }
            k = j + 1;
        }
        let b = design_matrix(&probe, &data, fit, kernel)?;
        let lam = crate::linalg::sym_min_eigenvalue(&b);
        min_lambda = min_lambda.min(lam);
        if lam <= floor {
            flagged.push((probe.clone(), lam));
        }
    }
    Ok(GridReport { c_cvr, one_over_n_branch: c_cvr == 0.0, min_lambda, flagged })
}

/// Uniform grid `{(T k_1 / n0, .., T k_d / n0) : k_j in 1..=n0}`.
pub fn uniform_grid(d: usize, n0: usize, extent: f64) -> Vec<Vec<f64>> {
    let total = n0.pow(d as u32);
    (0..total)
        .map(|code| {
            let mut c = code;
            (0..d)
                .map(|_| {
                    let k = c % n0 + 1;
                    c /= n0;
                    extent * k as f64 / n0 as f64
                })
                .collect()
        })
        .collect()
}
