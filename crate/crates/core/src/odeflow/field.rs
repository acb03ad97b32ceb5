use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Evaluator signature: writes `f(x)` into the output slice.
pub type FieldFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Axis-aligned box on which the derivative bounds of a field are certified.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoundingBox {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        BoundingBox { lower: vec![lo; dim], upper: vec![hi; dim] }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Largest Euclidean norm of a point of the box.
    pub fn max_norm(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo.abs().max(hi.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Right-hand side `f: R^d -> R^d` of an autonomous ODE together with its
/// declared smoothness class: `beta` derivatives with operator-norm bounds
/// `L_0..L_beta` holding on `domain`.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    dim: usize,
    beta: usize,
    bounds: Vec<f64>,
    domain: BoundingBox,
    eval: FieldFn,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("beta", &self.beta)
            .field("bounds", &self.bounds)
            .field("domain", &self.domain)
            .finish()
    }
}

impl VectorField {
    /// `bounds` holds `L_0..L_beta` (length `beta + 1`); `L_0` may be infinite.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        beta: usize,
        bounds: Vec<f64>,
        domain: BoundingBox,
        eval: FieldFn,
    ) -> Result<Self> {
        if dim == 0 || beta == 0 {
            return Err(Error::InvalidInput("dimension and smoothness must be positive".into()));
        }
        if bounds.len() != beta + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} derivative bounds, got {}",
                beta + 1,
                bounds.len()
            )));
        }
        if bounds[0].is_nan() || bounds[0] <= 0.0 || bounds[1..].iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidInput("derivative bounds must be positive, L_1.. finite".into()));
        }
        if domain.lower.len() != dim || domain.upper.len() != dim {
            return Err(Error::InvalidInput("domain box dimension mismatch".into()));
        }
        Ok(VectorField { name: name.into(), dim, beta, bounds, domain, eval })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    /// `L_0..L_beta`.
    pub fn derivative_bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// Lipschitz constant `L_1`.
    pub fn lipschitz(&self) -> f64 {
        self.bounds[1]
    }

    pub fn domain(&self) -> &BoundingBox {
        &self.domain
    }

    /// Same field with the smoothness claim truncated to `beta` derivatives.
    pub fn with_beta(&self, beta: usize) -> Result<Self> {
        if beta == 0 || beta > self.beta {
            return Err(Error::InvalidInput(format!(
                "field '{}' is certified up to beta = {}",
                self.name, self.beta
            )));
        }
        let mut out = self.clone();
        out.beta = beta;
        out.bounds.truncate(beta + 1);
        Ok(out)
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        (self.eval)(x, out)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        (self.eval)(x, &mut out);
        out
    }

    /// Estimates `||D^k f(x)||` for `k = 1..beta` by central finite differences
    /// along random unit directions at random points of the domain box, and
    /// reports the worst ratio to the declared bound per order.
    pub fn check_bounds(&self, samples: usize, seed: u64) -> SmoothnessReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let step = 1e-3;
        let margin = step * (self.beta as f64) / 2.0;
        let mut ratio = vec![0.0f64; self.beta + 1];
        let mut fx = vec![0.0; self.dim];
        let mut acc = vec![0.0; self.dim];
        for _ in 0..samples {
            let x: Vec<f64> = (0..self.dim)
                .map(|k| {
                    let lo = self.domain.lower[k] + margin;
                    let hi = self.domain.upper[k] - margin;
                    lo + (hi - lo) * rng.random::<f64>()
                })
                .collect();
            let mut v: Vec<f64> = (0..self.dim).map(|_| rng.random::<f64>() - 0.5).collect();
            let nv = crate::linalg::norm(&v).max(1e-300);
            v.iter_mut().for_each(|a| *a /= nv);

            self.eval_into(&x, &mut fx);
            if self.bounds[0].is_finite() {
                ratio[0] = ratio[0].max(crate::linalg::norm(&fx) / self.bounds[0]);
            }
            for k in 1..=self.beta {
                acc.iter_mut().for_each(|a| *a = 0.0);
                let mut binom = 1.0;
                let mut fmax = 0.0f64;
                for j in 0..=k {
                    let offset = (k as f64 / 2.0 - j as f64) * step;
                    let p: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + offset * b).collect();
                    self.eval_into(&p, &mut fx);
                    fmax = fmax.max(crate::linalg::norm(&fx) + self.bounds[1] * crate::linalg::norm(&p));
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    for (a, b) in acc.iter_mut().zip(&fx) {
                        *a += sign * binom * b;
                    }
                    binom = binom * (k - j) as f64 / (j + 1) as f64;
                }
                // Rounding of the stencil points and values is at most 2^k eps (|f| + L_1 |p|);
                // only the excess over that counts against the bound.
                let roundoff = 4.0 * 2f64.powi(k as i32) * f64::EPSILON * fmax;
                let dk = (crate::linalg::norm(&acc) - roundoff).max(0.0) / step.powi(k as i32);
                ratio[k] = ratio[k].max(dk / self.bounds[k]);
            }
        }
        SmoothnessReport { max_ratio: ratio }
    }
}

/// Worst observed `|D^k f| / L_k` per derivative order `k = 0..beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessReport {
    pub max_ratio: Vec<f64>,
}

impl SmoothnessReport {
    /// True when every order stays within `L_k * (1 + slack)`.
    pub fn within(&self, slack: f64) -> bool {
        self.max_ratio.iter().all(|r| *r <= 1.0 + slack)
    }
}

// Tiny positive bound used for derivatives that vanish identically.
const VANISHING: f64 = 1e-300;

/// `f = 0` in `dim` dimensions.
pub fn zero(dim: usize) -> VectorField {
    let beta = 3;
    VectorField::new(
        "zero",
        dim,
        beta,
        vec![VANISHING; beta + 1],
        BoundingBox::cube(dim, -1e6, 1e6),
        Arc::new(|_x, out| out.iter_mut().for_each(|o| *o = 0.0)),
    )
    .expect("valid zero field")
}

/// `f = c`.
pub fn constant(c: Vec<f64>) -> VectorField {
    let dim = c.len();
    let beta = 3;
    let mut bounds = vec![VANISHING; beta + 1];
    bounds[0] = crate::linalg::norm(&c).max(VANISHING);
    VectorField::new(
        "constant",
        dim,
        beta,
        bounds,
        BoundingBox::cube(dim, -1e6, 1e6),
        Arc::new(move |_x, out| out.copy_from_slice(&c)),
    )
    .expect("valid constant field")
}

/// `f(u) = A u` with `A` given row-major; `L_0` is certified on `domain`.
pub fn linear(name: &str, a: Vec<Vec<f64>>, domain: BoundingBox) -> Result<VectorField> {
    let dim = a.len();
    if a.iter().any(|row| row.len() != dim) {
        return Err(Error::InvalidInput("linear field matrix must be square".into()));
    }
    let m = nalgebra::DMatrix::from_fn(dim, dim, |i, j| a[i][j]);
    let op = crate::linalg::spectral_norm(&m).max(VANISHING);
    let beta = 3;
    let mut bounds = vec![VANISHING; beta + 1];
    bounds[0] = (op * domain.max_norm()).max(VANISHING);
    bounds[1] = op;
    VectorField::new(
        name,
        dim,
        beta,
        bounds,
        domain,
        Arc::new(move |x, out| {
            for (o, row) in out.iter_mut().zip(&a) {
                *o = row.iter().zip(x).map(|(p, q)| p * q).sum();
            }
        }),
    )
}

/// Planar rotation `f(u) = (-u_2, u_1)`; solutions are circles of period `2 pi`.
pub fn rotation() -> VectorField {
    linear(
        "rotation",
        vec![vec![0.0, -1.0], vec![1.0, 0.0]],
        BoundingBox::cube(2, -2.0, 2.0),
    )
    .expect("valid rotation field")
}

/// First-order form of `u^(order) = g(u, u', .., u^(order-1))` for `u` in `R^d`.
///
/// The state is the stack `(u, u', .., u^(order-1))` of dimension `d * order`
/// and `g` receives that stack and writes `u^(order)` (length `d`). Time
/// dependence is removed the same way by appending `t` as a state
/// component with derivative 1.
pub fn first_order_reduction(
    name: &str,
    d: usize,
    order: usize,
    beta: usize,
    bounds: Vec<f64>,
    domain: BoundingBox,
    g: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
) -> Result<VectorField> {
    if order == 0 {
        return Err(Error::InvalidInput("order must be positive".into()));
    }
    let dim = d * order;
    VectorField::new(
        name,
        dim,
        beta,
        bounds,
        domain,
        Arc::new(move |x, out| {
            out[..dim - d].copy_from_slice(&x[d..]);
            g(x, &mut out[dim - d..]);
        }),
    )
}

/// Damped pendulum `theta'' = -sin(theta) - c theta'` in first-order form,
/// certified on `[-2, 2]^2`.
pub fn damped_pendulum(damping: f64) -> VectorField {
    let c = damping;
    let domain = BoundingBox::cube(2, -2.0, 2.0);
    // Jacobian [[0, 1], [-cos, -c]] has Frobenius norm at most sqrt(2 + c^2).
    let l1 = (2.0 + c * c).sqrt();
    let l0 = (2.0f64.powi(2) + (1.0 + 2.0 * c.abs()).powi(2)).sqrt();
    first_order_reduction(
        "pendulum",
        1,
        2,
        3,
        vec![l0, l1, 1.0, 1.0],
        domain,
        Arc::new(move |x, out| out[0] = -x[0].sin() - c * x[1]),
    )
    .expect("valid pendulum field")
}

/// Componentwise cubic `f_k(u) = u_k - u_k^3`, with bounds certified on
/// `[-1.5, 1.5]^d`. Experiments keep trajectories inside that box and report
/// exits instead of using the unbounded polynomial growth outside it.
pub fn cubic(dim: usize) -> VectorField {
    let r: f64 = 1.5;
    let domain = BoundingBox::cube(dim, -r, r);
    let per = (r * r * r - r).abs().max(2.0 / (3.0 * 3f64.sqrt()));
    let l0 = per * (dim as f64).sqrt();
    let l1 = 3.0 * r * r - 1.0;
    let l2 = 6.0 * r;
    let l3 = 6.0;
    VectorField::new(
        "cubic",
        dim,
        3,
        vec![l0, l1, l2, l3],
        domain,
        Arc::new(|x, out| {
            for (o, v) in out.iter_mut().zip(x) {
                *o = v - v * v * v;
            }
        }),
    )
    .expect("valid cubic field")
}

/// Names accepted by [`by_name`].
pub const BUILTIN_FIELDS: &[&str] = &["zero", "constant", "rotation", "pendulum", "cubic"];

/// Built-in field lookup used by the CLI. `constant` is the first unit vector.
pub fn by_name(name: &str, dim: usize) -> Result<VectorField> {
    match name {
        "zero" => Ok(zero(dim)),
        "constant" => {
            let mut c = vec![0.0; dim];
            if dim > 0 {
                c[0] = 1.0;
            }
            Ok(constant(c))
        }
        "rotation" if dim == 2 => Ok(rotation()),
        "pendulum" if dim == 2 => Ok(damped_pendulum(0.1)),
        "rotation" | "pendulum" => Err(Error::InvalidInput(format!("field '{name}' requires d = 2"))),
        "cubic" => Ok(cubic(dim)),
        other => Err(Error::UnknownField(other.to_string())),
    }
}
