use serde::{Deserialize, Serialize};

use super::field::VectorField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with step `max_step`.
    Rk4Fixed,
    /// Dormand-Prince 5(4) with local error control, advancing the 5th-order solution.
    Rk45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { method: Method::Rk45Adaptive, abs_tol: 1e-10, rel_tol: 1e-10, max_step: 0.1 }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_step > 0.0) {
            return Err(Error::InvalidInput("flow tolerances and max_step must be positive".into()));
        }
        Ok(())
    }
}

/// A sampled solution `u(times[i]) = states[i]`, `states[0] = x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub x0: Vec<f64>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

const MAX_STEPS: usize = 50_000_000;

// Dormand-Prince tableau; the field is autonomous so the nodes c_i are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Stateful integrator that carries the accepted step size across calls so
/// that consecutive intervals are integrated by continuation.
struct Stepper<'a> {
    f: &'a VectorField,
    sign: f64,
    cfg: FlowConfig,
    h: Option<f64>,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    next: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(f: &'a VectorField, sign: f64, cfg: FlowConfig) -> Self {
        let d = f.dim();
        Stepper { f, sign, cfg, h: None, k: vec![vec![0.0; d]; 7], tmp: vec![0.0; d], next: vec![0.0; d] }
    }

    fn rhs(&self, x: &[f64], out: &mut [f64]) {
        self.f.eval_into(x, out);
        if self.sign < 0.0 {
            out.iter_mut().for_each(|v| *v = -*v);
        }
    }

    /// Advances `y` from `t0` to `t1 >= t0`, both measured in the
    /// sign-flipped system.
    fn advance(&mut self, y: &mut [f64], t0: f64, t1: f64) -> Result<()> {
        if t1 <= t0 {
            return Ok(());
        }
        match self.cfg.method {
            Method::Rk4Fixed => self.advance_rk4(y, t0, t1),
            Method::Rk45Adaptive => self.advance_dp(y, t0, t1),
        }
    }

    fn advance_rk4(&mut self, y: &mut [f64], t0: f64, t1: f64) -> Result<()> {
        let span = t1 - t0;
        let steps = (span / self.cfg.max_step).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        let d = y.len();
        for step in 0..steps {
            let mut k = std::mem::take(&mut self.k);
            self.rhs(y, &mut k[0]);
            for i in 0..d {
                self.tmp[i] = y[i] + 0.5 * h * k[0][i];
            }
            self.rhs(&self.tmp, &mut k[1]);
            for i in 0..d {
                self.tmp[i] = y[i] + 0.5 * h * k[1][i];
            }
            self.rhs(&self.tmp, &mut k[2]);
            for i in 0..d {
                self.tmp[i] = y[i] + h * k[2][i];
            }
            self.rhs(&self.tmp, &mut k[3]);
            for i in 0..d {
                y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
            }
            self.k = k;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState { reached_t: self.sign * (t0 + step as f64 * h) });
            }
        }
        Ok(())
    }

    fn initial_step(&self, y: &[f64], span: f64) -> f64 {
        let mut f0 = vec![0.0; y.len()];
        self.rhs(y, &mut f0);
        let scale = |i: usize| self.cfg.abs_tol + self.cfg.rel_tol * y[i].abs();
        let d0 = rms((0..y.len()).map(|i| y[i] / scale(i)));
        let d1 = rms((0..y.len()).map(|i| f0[i] / scale(i)));
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(self.cfg.max_step).min(span)
    }

    fn advance_dp(&mut self, y: &mut [f64], t0: f64, t1: f64) -> Result<()> {
        let d = y.len();
        let mut t = t0;
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(y, t1 - t0),
        };
        let mut k = std::mem::take(&mut self.k);
        self.rhs(y, &mut k[0]);
        let mut steps = 0usize;
        while t < t1 {
            steps += 1;
            if steps > MAX_STEPS {
                self.k = k;
                return Err(Error::StepSizeUnderflow { reached_t: self.sign * t, target_t: self.sign * t1 });
            }
            let remaining = t1 - t;
            let last = h >= remaining;
            let hs = if last { remaining } else { h.min(self.cfg.max_step) };
            for s in 1..7 {
                for i in 0..d {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += hs * A[s][j] * kj[i];
                    }
                    self.tmp[i] = acc;
                }
                self.rhs(&self.tmp, &mut k[s]);
            }
            // Stage 7 was evaluated at the 5th-order solution (FSAL).
            let mut err = 0.0;
            for i in 0..d {
                let mut acc = y[i];
                for j in 0..6 {
                    acc += hs * A[6][j] * k[j][i];
                }
                self.next[i] = acc;
                let mut e = 0.0;
                for j in 0..7 {
                    e += hs * E[j] * k[j][i];
                }
                let sc = self.cfg.abs_tol + self.cfg.rel_tol * y[i].abs().max(acc.abs());
                err += (e / sc).powi(2);
            }
            let err = (err / d as f64).sqrt();
            if !err.is_finite() {
                self.k = k;
                return Err(Error::NonFiniteState { reached_t: self.sign * t });
            }
            if err <= 1.0 {
                t = if last { t1 } else { t + hs };
                y.copy_from_slice(&self.next);
                let k6 = k[6].clone();
                k[0].copy_from_slice(&k6);
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // Keep the unclipped step for the next interval after a shortened final step.
                h = if last { h.max(hs * factor).min(self.cfg.max_step) } else { (hs * factor).min(self.cfg.max_step) };
            } else {
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                if h <= 1e-14 * t.abs().max(1.0) {
                    self.k = k;
                    return Err(Error::StepSizeUnderflow { reached_t: self.sign * t, target_t: self.sign * t1 });
                }
            }
        }
        self.k = k;
        self.h = Some(h);
        Ok(())
    }
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    let mut n = 0usize;
    for v in it {
        s += v * v;
        n += 1;
    }
    (s / n.max(1) as f64).sqrt()
}

fn check_dims(f: &VectorField, x0: &[f64]) -> Result<()> {
    if x0.len() != f.dim() {
        return Err(Error::InvalidInput(format!(
            "state has dimension {}, field '{}' has {}",
            x0.len(),
            f.name(),
            f.dim()
        )));
    }
    Ok(())
}

/// Approximates the flow `U(f, x0, t)`. Negative `t` integrates the
/// sign-flipped field forward over `|t|`. `t = 0` returns `x0` unchanged.
pub fn integrate_flow(f: &VectorField, x0: &[f64], t: f64, cfg: &FlowConfig) -> Result<Vec<f64>> {
    check_dims(f, x0)?;
    cfg.validate()?;
    if !t.is_finite() {
        return Err(Error::InvalidInput("integration time must be finite".into()));
    }
    let mut y = x0.to_vec();
    if t == 0.0 {
        return Ok(y);
    }
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    let mut stepper = Stepper::new(f, sign, *cfg);
    stepper.advance(&mut y, 0.0, t.abs())?;
    Ok(y)
}

/// The increment `U(f, x, dt) - x`; exactly zero for `dt = 0`.
pub fn increment(f: &VectorField, dt: f64, x: &[f64], cfg: &FlowConfig) -> Result<Vec<f64>> {
    if dt < 0.0 {
        return Err(Error::InvalidInput("increment requires dt >= 0".into()));
    }
    if dt == 0.0 {
        check_dims(f, x)?;
        return Ok(vec![0.0; x.len()]);
    }
    let y = integrate_flow(f, x, dt, cfg)?;
    Ok(y.iter().zip(x).map(|(a, b)| a - b).collect())
}

/// Samples `U(f, x0, times[i])` by integrating continuously from one sample
/// time to the next.
pub fn sample_trajectory(f: &VectorField, x0: &[f64], times: &[f64], cfg: &FlowConfig) -> Result<Trajectory> {
    check_dims(f, x0)?;
    cfg.validate()?;
    if times.first() != Some(&0.0) {
        return Err(Error::InvalidInput("sample times must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] >= w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidInput("sample times must be finite and nondecreasing".into()));
    }
    let mut stepper = Stepper::new(f, 1.0, *cfg);
    let mut y = x0.to_vec();
    let mut states = Vec::with_capacity(times.len());
    states.push(y.clone());
    for w in times.windows(2) {
        stepper.advance(&mut y, w[0], w[1])?;
        states.push(y.clone());
    }
    Ok(Trajectory { x0: x0.to_vec(), times: times.to_vec(), states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odeflow::field;
    use std::f64::consts::PI;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn zero_and_constant_fields() {
        let cfg = FlowConfig::default();
        let x = integrate_flow(&field::zero(2), &[1.0, 2.0], 5.0, &cfg).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
        let x = integrate_flow(&field::constant(vec![1.0, 0.0]), &[0.0, 0.0], 2.0, &cfg).unwrap();
        assert!(close(&x, &[2.0, 0.0], 1e-12));
        let inc = increment(&field::constant(vec![1.0, -2.0]), 0.3, &[5.0, 1.0], &cfg).unwrap();
        assert!(close(&inc, &[0.3, -0.6], 1e-12));
    }

    #[test]
    fn time_zero_is_identity() {
        let cfg = FlowConfig::default();
        let x0 = [0.123456789, -3.5];
        assert_eq!(integrate_flow(&field::rotation(), &x0, 0.0, &cfg).unwrap(), x0.to_vec());
        assert_eq!(increment(&field::rotation(), 0.0, &x0, &cfg).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rotation_closed_form() {
        let cfg = FlowConfig::default();
        let f = field::rotation();
        let x = integrate_flow(&f, &[1.0, 0.0], PI / 2.0, &cfg).unwrap();
        assert!(close(&x, &[0.0, 1.0], 1e-6));
        let inc = increment(&f, 0.1, &[1.0, 0.0], &cfg).unwrap();
        assert!(close(&inc, &[0.1f64.cos() - 1.0, 0.1f64.sin()], 1e-8));
    }

    #[test]
    fn backward_time_inverts_forward() {
        let cfg = FlowConfig::default();
        let f = field::damped_pendulum(0.2);
        let x = integrate_flow(&f, &[0.5, -0.3], 1.3, &cfg).unwrap();
        let back = integrate_flow(&f, &x, -1.3, &cfg).unwrap();
        assert!(close(&back, &[0.5, -0.3], 1e-8));
    }

    #[test]
    fn rk4_matches_adaptive() {
        let f = field::damped_pendulum(0.1);
        let a = integrate_flow(&f, &[1.0, 0.0], 2.0, &FlowConfig::default()).unwrap();
        let cfg = FlowConfig { method: Method::Rk4Fixed, max_step: 1e-3, ..FlowConfig::default() };
        let b = integrate_flow(&f, &[1.0, 0.0], 2.0, &cfg).unwrap();
        assert!(close(&a, &b, 1e-10));
    }

    #[test]
    fn trajectory_cycles_on_rotation() {
        let cfg = FlowConfig::default();
        let times: Vec<f64> = (0..5).map(|k| k as f64 * PI / 2.0).collect();
        let tr = sample_trajectory(&field::rotation(), &[1.0, 0.0], &times, &cfg).unwrap();
        let expect = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [1.0, 0.0]];
        for (s, e) in tr.states.iter().zip(expect.iter()) {
            assert!(close(s, e, 1e-5), "{s:?} vs {e:?}");
        }
        let single = sample_trajectory(&field::rotation(), &[1.0, 0.0], &[0.0], &cfg).unwrap();
        assert_eq!(single.states, vec![vec![1.0, 0.0]]);
    }

    #[test]
    fn rejects_bad_times() {
        let cfg = FlowConfig::default();
        assert!(sample_trajectory(&field::rotation(), &[1.0, 0.0], &[0.0, 1.0, 0.5], &cfg).is_err());
        assert!(sample_trajectory(&field::rotation(), &[1.0, 0.0], &[0.1], &cfg).is_err());
        assert!(increment(&field::rotation(), -0.1, &[1.0, 0.0], &cfg).is_err());
    }

    #[test]
    fn blowup_is_reported() {
        let f = VectorField::new(
            "blowup",
            1,
            1,
            vec![f64::INFINITY, 1.0],
            field::BoundingBox::cube(1, -1.0, 1.0),
            std::sync::Arc::new(|x, out| out[0] = x[0] * x[0]),
        )
        .unwrap();
        let err = integrate_flow(&f, &[1.0], 2.0, &FlowConfig::default()).unwrap_err();
        match err {
            Error::StepSizeUnderflow { reached_t, .. } | Error::NonFiniteState { reached_t } => {
                assert!(reached_t > 0.5 && reached_t <= 1.0 + 1e-6, "{reached_t}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
