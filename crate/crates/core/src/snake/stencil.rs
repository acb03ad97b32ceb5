use serde::{Deserialize, Serialize};

use super::curve::CurveEstimate;
use crate::error::{Error, Result};
use crate::localpoly::basis_len;
use crate::polyinterp::{mu_interior_contains, stability_norm, Stencil};

/// Stability and geometry constants of the stencil search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StencilConfig {
    /// Stability bound `s`; selected stencils satisfy `stability <= 2 s`.
    pub s: f64,
    /// Diameter window factor `D > 1` of the estimable-region test.
    pub d_factor: f64,
    /// Interior margin `mu` in `(0, 1/N)` of the estimable-region test.
    pub mu: f64,
    /// Interpolation degree `l = beta - 1`.
    pub degree: usize,
    /// At most this many farthest-point samples per search radius.
    pub per_scale: usize,
    /// Upper bound on distinct pool points examined.
    pub pool: usize,
    /// Grid-index offsets tried during local swaps.
    pub swap_radius: usize,
}

impl StencilConfig {
    /// Defaults `s = 50`, `D = 4`, `mu = 0.5 / N` for degree `beta - 1` in `d` dimensions.
    pub fn for_beta(beta: usize, d: usize) -> Self {
        let degree = beta.saturating_sub(1);
        let n = basis_len(d, degree);
        StencilConfig { s: 50.0, d_factor: 4.0, mu: 0.5 / n as f64, degree, per_scale: 12, pool: 64, swap_radius: 3 }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let n = basis_len(d, self.degree) as f64;
        if !(self.s > 0.0) || !(self.d_factor > 1.0) || !(self.mu > 0.0 && self.mu * n < 1.0) {
            return Err(Error::InvalidInput("stencil config needs s > 0, D > 1, 0 < mu < 1/N".into()));
        }
        if self.per_scale == 0 || self.pool == 0 {
            return Err(Error::InvalidInput("stencil pool sizes must be positive".into()));
        }
        Ok(())
    }
}

struct Requirement {
    mu: f64,
    max_stability: f64,
    diameter: Option<(f64, f64)>,
}

struct Best {
    idx: Vec<usize>,
    objective: f64,
    stability: f64,
}

struct Search<'a> {
    curve: &'a CurveEstimate,
    x: &'a [f64],
    degree: usize,
    req: Requirement,
    examined: usize,
}

impl Search<'_> {
    fn points(&self, idx: &[usize]) -> Vec<Vec<f64>> {
        idx.iter().map(|&i| self.curve.grid_points()[i].clone()).collect()
    }

    /// Objective `stability * diam^(l + 1)` of an admissible subset.
    fn score(&mut self, idx: &[usize]) -> Option<(f64, f64)> {
        self.examined += 1;
        let pts = self.points(idx);
        let diam = crate::linalg::diameter(&pts);
        if let Some((lo, hi)) = self.req.diameter {
            if diam < lo || diam > hi {
                return None;
            }
        }
        let stab = stability_norm(&pts, self.degree);
        if !(stab <= self.req.max_stability) {
            return None;
        }
        match mu_interior_contains(&pts, self.req.mu, self.x) {
            Ok(true) => Some((stab * diam.powi(self.degree as i32 + 1), stab)),
            _ => None,
        }
    }

    fn consider(&mut self, idx: &[usize], best: &mut Option<Best>) {
        if let Some((obj, stab)) = self.score(idx) {
            if best.as_ref().is_none_or(|b| obj < b.objective) {
                *best = Some(Best { idx: idx.to_vec(), objective: obj, stability: stab });
            }
        }
    }
}

/// Greedy farthest-point subsample of `cand` (sorted by distance to `x`),
/// seeded with the nearest candidate.
fn farthest_points(curve: &CurveEstimate, cand: &[usize], k: usize) -> Vec<usize> {
    if cand.len() <= k {
        return cand.to_vec();
    }
    let pts = curve.grid_points();
    let mut chosen = vec![cand[0]];
    let mut gap: Vec<f64> = cand.iter().map(|&i| crate::linalg::dist_sq(&pts[i], &pts[cand[0]])).collect();
    while chosen.len() < k {
        let (j, g) = gap.iter().enumerate().fold((0, -1.0), |acc, (j, g)| if *g > acc.1 { (j, *g) } else { acc });
        if g <= 0.0 {
            break;
        }
        let next = cand[j];
        chosen.push(next);
        for (gj, &i) in gap.iter_mut().zip(cand) {
            *gj = gj.min(crate::linalg::dist_sq(&pts[i], &pts[next]));
        }
    }
    chosen
}

fn for_each_subset(pool: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    let n = pool.len();
    if k == 0 || k > n {
        return;
    }
    let mut pos: Vec<usize> = (0..k).collect();
    let mut buf = vec![0usize; k];
    loop {
        for (b, &p) in buf.iter_mut().zip(&pos) {
            *b = pool[p];
        }
        f(&buf);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if pos[i] < n - k + i {
                break;
            }
            if i == 0 {
                return;
            }
        }
        pos[i] += 1;
        for j in (i + 1)..k {
            pos[j] = pos[j - 1] + 1;
        }
    }
}

fn search(curve: &CurveEstimate, x: &[f64], cfg: &StencilConfig, req: Requirement) -> Result<(Stencil, usize)> {
    let d = curve.dim();
    if x.len() != d {
        return Err(Error::InvalidInput("query dimension mismatch".into()));
    }
    let n = basis_len(d, cfg.degree);
    let pts = curve.grid_points();
    let mut order: Vec<(f64, usize)> = pts.iter().enumerate().map(|(i, p)| (crate::linalg::dist(p, x), i)).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut s = Search { curve, x, degree: cfg.degree, req, examined: 0 };
    let mut best: Option<Best> = None;
    if order.len() < n {
        return Err(Error::NoStencilFound { examined: 0 });
    }

    // Radii double from the distance of the N-th nearest grid point until
    // the ball covers the whole grid.
    let far = order.last().unwrap().0;
    let mut radius = order[n - 1].0.max(1e-12 * far.max(1.0));
    let mut seen = std::collections::BTreeSet::new();
    loop {
        let cut = order.partition_point(|(r, _)| *r <= radius);
        let cand: Vec<usize> = order[..cut].iter().map(|(_, i)| *i).collect();
        let pool = farthest_points(curve, &cand, cfg.per_scale);
        let pool_pts: Vec<Vec<f64>> = pool.iter().map(|&i| pts[i].clone()).collect();
        // Scales whose pool cannot surround x are skipped without charge.
        let surrounds = pool.len() >= n && mu_interior_contains(&pool_pts, 0.0, x).unwrap_or(true);
        if surrounds && seen.len() < cfg.pool {
            seen.extend(pool.iter().cloned());
            for_each_subset(&pool, n, &mut |idx| s.consider(idx, &mut best));
        }
        if radius >= far || seen.len() >= cfg.pool {
            break;
        }
        radius *= 2.0;
    }

    // Local swaps along the curve.
    if let Some(b) = best.as_mut() {
        let last = pts.len() - 1;
        let mut improved = true;
        let mut rounds = 0;
        while improved && rounds < 50 {
            improved = false;
            rounds += 1;
            for slot in 0..b.idx.len() {
                for off in 1..=cfg.swap_radius {
                    for sign in [-1i64, 1] {
                        let j = b.idx[slot] as i64 + sign * off as i64;
                        if j < 0 || j as usize > last || b.idx.contains(&(j as usize)) {
                            continue;
                        }
                        let mut trial = b.idx.clone();
                        trial[slot] = j as usize;
                        if let Some((obj, stab)) = s.score(&trial) {
                            if obj < b.objective {
                                *b = Best { idx: trial, objective: obj, stability: stab };
                                improved = true;
                            }
                        }
                    }
                }
            }
        }
    }

    match best {
        Some(b) => {
            let mut idx = b.idx;
            idx.sort_unstable();
            let points: Vec<Vec<f64>> = idx.iter().map(|&i| pts[i].clone()).collect();
            let times = idx.iter().map(|&i| curve.grid_times()[i]).collect();
            let diameter = crate::linalg::diameter(&points);
            Ok((Stencil { points, times, diameter, stability: b.stability }, s.examined))
        }
        None => Err(Error::NoStencilFound { examined: s.examined }),
    }
}

/// Stencil of `N = C(l + d, d)` grid points of the curve with `x` in their
/// closed convex hull and stability at most `2 s`, minimizing
/// `stability * diam^(l + 1)` over the examined pool.
///
/// The pool is built at doubling radii around `x`: at each radius the grid
/// points inside the ball are thinned by farthest-point sampling and all
/// `N`-subsets are scored. The best subset is then improved by swapping
/// members for nearby grid indices. The result is optimal over the
/// examined candidates, hence within factor 2 of their minimum.
pub fn select_stencil(curve: &CurveEstimate, x: &[f64], cfg: &StencilConfig) -> Result<Stencil> {
    let req = Requirement { mu: 0.0, max_stability: 2.0 * cfg.s, diameter: None };
    search(curve, x, cfg, req).map(|(s, _)| s)
}

/// Whether `x` lies in the estimable region at scale `delta`: some stencil
/// has `x` in its `mu`-interior, stability at most `s` and diameter in
/// `[delta / D, D delta]`. Decided over the same heuristic pool.
pub fn is_estimable(curve: &CurveEstimate, x: &[f64], delta: f64, cfg: &StencilConfig) -> Result<bool> {
    let req = Requirement {
        mu: cfg.mu,
        max_stability: cfg.s,
        diameter: Some((delta / cfg.d_factor, delta * cfg.d_factor)),
    };
    match search(curve, x, cfg, req) {
        Ok(_) => Ok(true),
        Err(Error::NoStencilFound { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Re-checks a stencil: size, reported diameter, stability `<= 2 s` and
/// closed-hull membership of `x`.
pub fn verify_stencil(stencil: &Stencil, x: &[f64], cfg: &StencilConfig) -> bool {
    let d = x.len();
    if stencil.points.len() != basis_len(d, cfg.degree) || stencil.times.len() != stencil.points.len() {
        return false;
    }
    let diam = crate::linalg::diameter(&stencil.points);
    if (diam - stencil.diameter).abs() > 1e-12 * diam.max(1.0) {
        return false;
    }
    let stab = stability_norm(&stencil.points, cfg.degree);
    stab <= 2.0 * cfg.s && matches!(mu_interior_contains(&stencil.points, 0.0, x), Ok(true))
}
