//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's linear algebra.
#![allow(dead_code)]

/// Gaussian elimination with partial pivoting; `None` on a zero pivot.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Smallest singular value of a square matrix via the eigenvalues of `M^T M`.
pub fn min_singular_value(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mtm: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| m[k][i] * m[k][j]).sum()).collect()).collect();
    jacobi_eigenvalues(mtm).into_iter().fold(f64::INFINITY, f64::min).max(0.0).sqrt()
}

/// All exponent vectors of total degree `<= degree` in `d` variables (any order).
pub fn exponents(d: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    fn rec(k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[k] = e;
            rec(k + 1, left - e, cur, out);
        }
        cur[k] = 0;
    }
    rec(0, degree, &mut cur, &mut out);
    out
}

pub fn monomial(alpha: &[usize], x: &[f64]) -> f64 {
    alpha.iter().zip(x).map(|(&a, &v)| v.powi(a as i32)).product()
}

/// `d/dx_j x^alpha`.
pub fn monomial_partial(alpha: &[usize], x: &[f64], j: usize) -> f64 {
    if alpha[j] == 0 {
        return 0.0;
    }
    let mut a = alpha.to_vec();
    a[j] -= 1;
    alpha[j] as f64 * monomial(&a, x)
}

/// Plain-monomial interpolation matrix of points normalized by centroid and diameter.
pub fn normalized_vandermonde(points: &[Vec<f64>], degree: usize) -> Vec<Vec<f64>> {
    let d = points[0].len();
    let n = points.len() as f64;
    let centroid: Vec<f64> = (0..d).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n).collect();
    let mut diam = 0.0f64;
    for a in points {
        for b in points {
            diam = diam.max(dist(a, b));
        }
    }
    let exps = exponents(d, degree);
    points
        .iter()
        .map(|p| {
            let eta: Vec<f64> = p.iter().zip(&centroid).map(|(a, c)| (a - c) / diam).collect();
            exps.iter().map(|e| monomial(e, &eta)).collect()
        })
        .collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Barycentric coordinates of `x` with respect to a `d`-simplex.
pub fn barycentric(simplex: &[Vec<f64>], x: &[f64]) -> Option<Vec<f64>> {
    let d = x.len();
    let mut a = vec![vec![0.0; d + 1]; d + 1];
    let mut b = vec![0.0; d + 1];
    for (k, p) in simplex.iter().enumerate() {
        for j in 0..d {
            a[j][k] = p[j];
        }
        a[d][k] = 1.0;
    }
    b[..d].copy_from_slice(x);
    b[d] = 1.0;
    solve_dense(a, b)
}

/// OLS slope and intercept of `ln y` on `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxy / sxx, my - sxy / sxx * mx)
}
