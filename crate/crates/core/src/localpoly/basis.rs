use serde::{Deserialize, Serialize};

/// Monomial scaling convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisMode {
    /// `x^alpha / alpha!`
    #[default]
    FactorialScaled,
    /// `x^alpha`
    Plain,
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Number of monomials of degree at most `degree` in `d` variables.
pub fn basis_len(d: usize, degree: usize) -> usize {
    binomial(degree + d, d)
}

/// Multi-indices of total degree `<= degree` in graded lexicographic order:
/// by total degree, then by decreasing exponent of the first variable, then
/// the second, and so on. In two variables of degree 2 this is
/// `1, a, b, a^2, ab, b^2`.
pub fn multi_indices(d: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(basis_len(d, degree));
    for k in 0..=degree {
        let mut cur = vec![0usize; d];
        push_compositions(&mut out, &mut cur, 0, k);
    }
    out
}

fn push_compositions(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, pos: usize, left: usize) {
    let d = cur.len();
    if d == 0 {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if pos == d - 1 {
        cur[pos] = left;
        out.push(cur.clone());
        return;
    }
    for a in (0..=left).rev() {
        cur[pos] = a;
        push_compositions(out, cur, pos + 1, left - a);
    }
    cur[pos] = 0;
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Precomputed monomial basis `psi` for fixed dimension and degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    d: usize,
    degree: usize,
    indices: Vec<Vec<usize>>,
    inv_fact: Vec<f64>,
}

impl Basis {
    pub fn new(d: usize, degree: usize) -> Self {
        let indices = multi_indices(d, degree);
        let inv_fact = indices
            .iter()
            .map(|a| 1.0 / a.iter().map(|&k| factorial(k)).product::<f64>())
            .collect();
        Basis { d, degree, indices, inv_fact }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    /// Writes `psi(x)` into `out` (length [`Basis::len`]).
    pub fn eval_into(&self, x: &[f64], mode: BasisMode, out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.d);
        // Powers x_j^k for k <= degree.
        let mut pow = vec![1.0; self.d * (self.degree + 1)];
        for j in 0..self.d {
            for k in 1..=self.degree {
                pow[j * (self.degree + 1) + k] = pow[j * (self.degree + 1) + k - 1] * x[j];
            }
        }
        for (i, a) in self.indices.iter().enumerate() {
            let mut v = 1.0;
            for (j, &k) in a.iter().enumerate() {
                v *= pow[j * (self.degree + 1) + k];
            }
            out[i] = match mode {
                BasisMode::FactorialScaled => v * self.inv_fact[i],
                BasisMode::Plain => v,
            };
        }
    }

    pub fn eval(&self, x: &[f64], mode: BasisMode) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, mode, &mut out);
        out
    }

    /// `D_v psi(0)` for directions `v_1..v_s`: only monomials of total degree
    /// `s` survive, with value `sum over index tuples (i_1..i_s) whose
    /// multiset is alpha of prod_k v_k[i_k]`, times `alpha!` in plain mode.
    pub fn directional_derivative_at_zero(&self, directions: &[Vec<f64>], mode: BasisMode) -> Vec<f64> {
        let s = directions.len();
        let mut out = vec![0.0; self.len()];
        if s > self.degree {
            return out;
        }
        let offset = basis_len(self.d, s.saturating_sub(1)) * usize::from(s > 0);
        let block = &self.indices[offset..offset + binomial(s + self.d - 1, s)];
        let mut tuple = vec![0usize; s];
        let total = self.d.pow(s as u32);
        let mut alpha = vec![0usize; self.d];
        for code in 0..total {
            let mut c = code;
            for slot in tuple.iter_mut() {
                *slot = c % self.d;
                c /= self.d;
            }
            alpha.iter_mut().for_each(|a| *a = 0);
            let mut prod = 1.0;
            for (k, &i) in tuple.iter().enumerate() {
                alpha[i] += 1;
                prod *= directions[k][i];
            }
            let pos = block.iter().position(|b| *b == alpha).expect("degree-s multi-index");
            out[offset + pos] += prod;
        }
        if mode == BasisMode::Plain {
            for i in offset..offset + block.len() {
                out[i] /= self.inv_fact[i];
            }
        }
        out
    }
}

/// `psi(x)` for degree `degree`; see [`multi_indices`] for the ordering.
pub fn monomial_basis(x: &[f64], degree: usize, mode: BasisMode) -> Vec<f64> {
    Basis::new(x.len(), degree).eval(x, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_order() {
        assert_eq!(basis_len(2, 1), 3);
        assert_eq!(basis_len(2, 2), 6);
        assert_eq!(basis_len(3, 2), 10);
        assert_eq!(monomial_basis(&[2.0, 3.0], 1, BasisMode::Plain), vec![1.0, 2.0, 3.0]);
        assert_eq!(
            monomial_basis(&[2.0, 3.0], 2, BasisMode::Plain),
            vec![1.0, 2.0, 3.0, 4.0, 6.0, 9.0]
        );
        assert_eq!(monomial_basis(&[2.0], 2, BasisMode::FactorialScaled), vec![1.0, 2.0, 2.0]);
        assert_eq!(
            multi_indices(3, 1),
            vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
        );
    }

    #[test]
    fn derivative_at_zero_matches_hand_values() {
        let b = Basis::new(2, 2);
        let v = vec![0.6, 0.8];
        assert_eq!(b.directional_derivative_at_zero(&[], BasisMode::Plain), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(
            b.directional_derivative_at_zero(std::slice::from_ref(&v), BasisMode::Plain),
            vec![0.0, 0.6, 0.8, 0.0, 0.0, 0.0]
        );
        // d^2/dt^2 of (tv)^alpha at 0: a^2 -> 2 v1^2, ab -> 2 v1 v2, b^2 -> 2 v2^2.
        let d2 = b.directional_derivative_at_zero(&[v.clone(), v.clone()], BasisMode::Plain);
        let expect = [0.0, 0.0, 0.0, 2.0 * 0.36, 2.0 * 0.48, 2.0 * 0.64];
        for (a, e) in d2.iter().zip(expect) {
            assert!((a - e).abs() < 1e-15);
        }
        let d2s = b.directional_derivative_at_zero(&[v.clone(), v], BasisMode::FactorialScaled);
        assert!((d2s[3] - 0.36).abs() < 1e-15 && (d2s[4] - 0.96).abs() < 1e-15);
    }
}
