use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Whether the ball `B(x, mu * diam(points))` lies in the convex hull of
/// `points` (closed hull for `mu = 0`).
///
/// Simplices (`N = d + 1`) use barycentric facet distances in any dimension.
/// Otherwise the points are expressed in their affine hull of rank `r` and
/// supporting hyperplanes through `r`-tuples are enumerated, which requires
/// `r <= 3`. A hull of lower dimension than the ambient space contains no
/// ball of positive radius.
pub fn mu_interior_contains(points: &[Vec<f64>], mu: f64, x: &[f64]) -> Result<bool> {
    if !(mu >= 0.0) {
        return Err(Error::InvalidInput("mu must be nonnegative".into()));
    }
    let npts = points.len();
    if npts == 0 {
        return Ok(false);
    }
    let d = x.len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidInput("hull point dimension mismatch".into()));
    }
    let diam = crate::linalg::diameter(points);
    let radius = mu * diam;
    let tol = 1e-12 * diam.max(1.0);

    // Affine frame: origin at points[0], orthonormal basis of the span.
    let base = &points[0];
    let diffs = DMatrix::from_fn(d, npts.saturating_sub(1).max(1), |r, c| {
        if c + 1 < npts {
            points[c + 1][r] - base[r]
        } else {
            0.0
        }
    });
    let svd = diffs.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank_cols: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-10 * smax.max(1e-300)).collect();
    let r = rank_cols.len();
    if r < d && radius > 0.0 {
        return Ok(false);
    }
    if r == 0 {
        return Ok(crate::linalg::dist(base, x) <= tol);
    }
    let frame = DMatrix::from_fn(d, r, |i, j| u[(i, rank_cols[j])]);
    let project = |p: &[f64]| -> (Vec<f64>, f64) {
        let v = DVector::from_iterator(d, p.iter().zip(base).map(|(a, b)| a - b));
        let c = frame.transpose() * &v;
        let resid = (&v - &frame * &c).norm();
        (c.iter().cloned().collect(), resid)
    };
    let (xc, resid) = project(x);
    if resid > 1e-9 * diam.max(1e-300) {
        return Ok(false);
    }
    let pc: Vec<Vec<f64>> = points.iter().map(|p| project(p).0).collect();

    if npts == r + 1 {
        return Ok(simplex_depth(&pc, &xc) >= radius - tol);
    }
    if r > 3 {
        return Err(Error::DimensionUnsupported { dim: d, points: npts });
    }
    Ok(facet_depth(&pc, &xc, diam)? >= radius - tol)
}

/// Minimum signed distance from `x` to the facets of a nondegenerate simplex
/// (negative outside).
fn simplex_depth(verts: &[Vec<f64>], x: &[f64]) -> f64 {
    let r = x.len();
    // Barycentric map lambda = M^-1 (x - v0) for the edge matrix M.
    let m = DMatrix::from_fn(r, r, |i, j| verts[j + 1][i] - verts[0][i]);
    let Some(inv) = m.try_inverse() else {
        return f64::NEG_INFINITY;
    };
    let rhs = DVector::from_iterator(r, x.iter().zip(&verts[0]).map(|(a, b)| a - b));
    let lam = &inv * rhs;
    let lam0 = 1.0 - lam.sum();
    // Gradient of lambda_j is row j of inv; of lambda_0 minus their sum.
    let mut g0 = DVector::zeros(r);
    let mut depth = f64::INFINITY;
    for j in 0..r {
        let row = inv.row(j).transpose();
        g0 -= &row;
        depth = depth.min(lam[j] / row.norm());
    }
    depth.min(lam0 / g0.norm())
}

/// Minimum signed distance from `x` to all supporting hyperplanes spanned by
/// `r`-tuples of points in `R^r`, `r <= 3`.
fn facet_depth(pts: &[Vec<f64>], x: &[f64], diam: f64) -> Result<f64> {
    let r = x.len();
    let n = pts.len();
    let tol = 1e-12 * diam.max(1e-300);
    let mut depth = f64::INFINITY;
    let mut found = false;
    let mut consider = |normal: Vec<f64>, offset: f64| {
        let nn = crate::linalg::norm(&normal);
        if nn <= 1e-14 * diam.max(1e-300).powi((r as i32 - 1).max(0)) {
            return;
        }
        let unit: Vec<f64> = normal.iter().map(|v| v / nn).collect();
        let off = offset / nn;
        let side = |p: &[f64]| unit.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() - off;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in pts {
            let s = side(p);
            lo = lo.min(s);
            hi = hi.max(s);
        }
        let sx = side(x);
        if lo >= -tol {
            depth = depth.min(sx);
            found = true;
        } else if hi <= tol {
            depth = depth.min(-sx);
            found = true;
        }
    };
    match r {
        1 => {
            let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            return Ok((x[0] - lo).min(hi - x[0]));
        }
        2 => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let (a, b) = (&pts[i], &pts[j]);
                    let normal = vec![-(b[1] - a[1]), b[0] - a[0]];
                    let offset = normal[0] * a[0] + normal[1] * a[1];
                    consider(normal, offset);
                }
            }
        }
        3 => {
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        let (a, b, c) = (&pts[i], &pts[j], &pts[k]);
                        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                        let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                        let normal = vec![
                            u[1] * v[2] - u[2] * v[1],
                            u[2] * v[0] - u[0] * v[2],
                            u[0] * v[1] - u[1] * v[0],
                        ];
                        let offset = normal[0] * a[0] + normal[1] * a[1] + normal[2] * a[2];
                        consider(normal, offset);
                    }
                }
            }
        }
        _ => return Err(Error::DimensionUnsupported { dim: r, points: n }),
    }
    Ok(if found { depth } else { f64::NEG_INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]
    }

    #[test]
    fn simplex_cases() {
        let t = tri();
        assert!(mu_interior_contains(&t, 0.0, &[0.0, 0.0]).unwrap());
        assert!(!mu_interior_contains(&t, 0.0, &[0.6, 0.6]).unwrap());
        let c = [1.0 / 3.0, 1.0 / 3.0];
        // Centroid-to-hypotenuse distance 0.2357, diameter sqrt 2.
        assert!(mu_interior_contains(&t, 0.1, &c).unwrap());
        assert!(!mu_interior_contains(&t, 0.5, &c).unwrap());
        let edge = (1.0 / 3.0) / 2f64.sqrt() / 2f64.sqrt();
        assert!(mu_interior_contains(&t, edge * 0.999, &c).unwrap());
        assert!(!mu_interior_contains(&t, edge * 1.001, &c).unwrap());
    }

    #[test]
    fn general_polygon_matches_simplex_logic() {
        let sq = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.5, 0.5], vec![0.2, 0.7]];
        assert!(mu_interior_contains(&sq, 0.0, &[0.9, 0.1]).unwrap());
        assert!(!mu_interior_contains(&sq, 0.0, &[1.1, 0.5]).unwrap());
        let mu_edge = 0.5 / 2f64.sqrt();
        assert!(mu_interior_contains(&sq, mu_edge * 0.99, &[0.5, 0.5]).unwrap());
        assert!(!mu_interior_contains(&sq, mu_edge * 1.01, &[0.5, 0.5]).unwrap());
    }

    #[test]
    fn three_dimensional_hull() {
        let mut cube = Vec::new();
        for k in 0..8 {
            cube.push(vec![(k & 1) as f64, ((k >> 1) & 1) as f64, ((k >> 2) & 1) as f64]);
        }
        assert!(mu_interior_contains(&cube, 0.0, &[0.5, 0.2, 0.9]).unwrap());
        assert!(!mu_interior_contains(&cube, 0.0, &[0.5, 0.2, 1.01]).unwrap());
        assert!(mu_interior_contains(&cube, 0.2, &[0.5, 0.5, 0.5]).unwrap());
        assert!(!mu_interior_contains(&cube, 0.3, &[0.5, 0.5, 0.5]).unwrap());
    }

    #[test]
    fn degenerate_and_unsupported() {
        let seg = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(mu_interior_contains(&seg, 0.0, &[0.5, 0.5]).unwrap());
        assert!(!mu_interior_contains(&seg, 0.0, &[0.5, 0.6]).unwrap());
        assert!(!mu_interior_contains(&seg, 0.1, &[0.5, 0.5]).unwrap());
        let pts: Vec<Vec<f64>> = (0..7)
            .map(|k| (0..4).map(|j| if k == j + 1 { 1.0 } else { (k as f64 * 0.37 + j as f64 * 0.11).fract() }).collect())
            .collect();
        assert!(matches!(
            mu_interior_contains(&pts, 0.0, &[0.3, 0.3, 0.3, 0.3]),
            Err(Error::DimensionUnsupported { .. })
        ));
        let simplex4: Vec<Vec<f64>> =
            (0..5).map(|k| (0..4).map(|j| if k == j + 1 { 1.0 } else { 0.0 }).collect()).collect();
        assert!(mu_interior_contains(&simplex4, 0.0, &[0.1, 0.1, 0.1, 0.1]).unwrap());
    }
}
