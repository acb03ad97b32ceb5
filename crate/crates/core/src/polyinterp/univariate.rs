use crate::error::{Error, Result};

/// Scalar polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly {
    pub coeffs: Vec<f64>,
}

impl UniPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        UniPoly { coeffs }
    }

    /// Degree bound `len - 1`.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> UniPoly {
        if self.coeffs.len() <= 1 {
            return UniPoly::new(vec![0.0]);
        }
        UniPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect())
    }
}

/// Exact `k`-th derivative of `p` at `t`.
pub fn derivative_at(p: &UniPoly, k: usize, t: f64) -> f64 {
    let mut q = p.clone();
    for _ in 0..k {
        q = q.derivative();
    }
    q.eval(t)
}

/// Componentwise interpolation polynomial of degree `<= ts.len() - 1` through
/// `(ts[i], ys[i])`, built from Newton divided differences.
pub fn interp_univariate(ts: &[f64], ys: &[Vec<f64>]) -> Result<Vec<UniPoly>> {
    if ts.is_empty() || ts.len() != ys.len() {
        return Err(Error::InvalidInput("need as many values as nodes".into()));
    }
    for i in 0..ts.len() {
        for j in (i + 1)..ts.len() {
            if ts[i] == ts[j] {
                return Err(Error::DuplicateNodes);
            }
        }
    }
    let dy = ys[0].len();
    if ys.iter().any(|y| y.len() != dy) {
        return Err(Error::InvalidInput("ragged interpolation values".into()));
    }
    Ok((0..dy)
        .map(|c| {
            let vals: Vec<f64> = ys.iter().map(|y| y[c]).collect();
            newton_to_monomial(ts, &divided_differences(ts, &vals))
        })
        .collect())
}

fn divided_differences(ts: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = ts.len();
    let mut a = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            a[i] = (a[i] - a[i - 1]) / (ts[i] - ts[i - j]);
        }
    }
    a
}

/// Expands `sum_j a_j prod_{i<j} (t - ts[i])` by Horner's scheme.
fn newton_to_monomial(ts: &[f64], a: &[f64]) -> UniPoly {
    let n = a.len();
    let mut c = vec![0.0; n];
    c[0] = a[n - 1];
    let mut len = 1;
    for j in (0..n - 1).rev() {
        // c <- c * (t - ts[j]) + a[j]
        for k in (1..=len).rev() {
            c[k] = c[k - 1] - ts[j] * c[k];
        }
        c[0] = a[j] - ts[j] * c[0];
        len += 1;
    }
    UniPoly::new(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_line() {
        let p = interp_univariate(&[0.0, 0.5, 2.0], &[vec![3.0], vec![3.0], vec![3.0]]).unwrap();
        assert!((p[0].coeffs[0] - 3.0).abs() < 1e-15);
        assert!(p[0].coeffs[1..].iter().all(|c| c.abs() < 1e-14));
        let p = interp_univariate(&[0.0, 1.0], &[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(p[0].coeffs, vec![0.0, 1.0]);
    }

    #[test]
    fn duplicates_rejected() {
        assert_eq!(interp_univariate(&[0.0, 0.0], &[vec![1.0], vec![2.0]]), Err(Error::DuplicateNodes));
    }

    #[test]
    fn derivatives() {
        let p = UniPoly::new(vec![0.0, 0.0, 1.0]);
        assert_eq!(derivative_at(&p, 1, 0.0), 0.0);
        assert_eq!(derivative_at(&p, 1, 3.0), 6.0);
        assert_eq!(derivative_at(&p, 2, 3.0), 2.0);
        assert_eq!(derivative_at(&p, 3, 3.0), 0.0);
    }

    #[test]
    fn two_node_slope_is_plain_quotient() {
        let dt = 0.37;
        let y = 0.123456789;
        let p = interp_univariate(&[0.0, dt], &[vec![0.0], vec![y]]).unwrap();
        assert_eq!(derivative_at(&p[0], 1, 0.0), y / dt);
    }
}
