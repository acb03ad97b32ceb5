mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{barycentric, dist, min_singular_value, normalized_vandermonde};
use odelearn::polyinterp::{
    derivative_at, interp_multivariate, interp_univariate, mu_interior_contains, normalize, psi_matrix,
    stability_norm, UniPoly,
};

fn n_of(d: usize, degree: usize) -> usize {
    common::exponents(d, degree).len()
}

/// Random stencil of `C(degree + d, d)` points in a ball of radius `scale` around `center`.
fn stencil(d: usize, degree: usize, center: &[f64], scale: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n_of(d, degree)).map(|_| center.iter().map(|c| c + scale * (2.0 * rng.random::<f64>() - 1.0)).collect()).collect()
}

/// Random point of the convex hull.
fn hull_point(points: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = points.iter().map(|_| -rng.random::<f64>().ln()).collect();
    let total: f64 = w.iter().sum();
    let d = points[0].len();
    (0..d).map(|j| points.iter().zip(&w).map(|(p, wk)| p[j] * wk / total).sum()).collect()
}

#[test]
fn univariate_recovers_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for degree in 0..=5 {
        for _ in 0..20 {
            let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-3.0..3.0)).collect();
            let ts: Vec<f64> =
                (0..=degree).map(|k| (std::f64::consts::PI * (k as f64 + 0.5) / (degree + 1) as f64).cos()).collect();
            let truth = UniPoly::new(coeffs.clone());
            let ys: Vec<Vec<f64>> = ts.iter().map(|&t| vec![truth.eval(t), -truth.eval(t)]).collect();
            let fit = interp_univariate(&ts, &ys).unwrap();
            for (a, b) in fit[0].coeffs.iter().zip(&coeffs) {
                assert!((a - b).abs() <= 1e-9, "degree {degree}: {a} vs {b}");
            }
            for (a, b) in fit[1].coeffs.iter().zip(&coeffs) {
                assert!((a + b).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn derivative_matches_central_differences() {
    let p = UniPoly::new(vec![0.3, -1.0, 2.0, 0.5, -0.25]);
    let h = 1e-3;
    for &t in &[-0.7, 0.0, 0.4, 1.3] {
        let fd1 = (p.eval(t + h) - p.eval(t - h)) / (2.0 * h);
        let fd2 = (p.eval(t + h) - 2.0 * p.eval(t) + p.eval(t - h)) / (h * h);
        assert!((derivative_at(&p, 1, t) - fd1).abs() <= 1e-5);
        assert!((derivative_at(&p, 2, t) - fd2).abs() <= 1e-4);
        assert_eq!(derivative_at(&p, 0, t), p.eval(t));
        assert_eq!(derivative_at(&p, 5, t), 0.0);
    }
}

#[test]
fn psi_of_unit_interval() {
    let m = psi_matrix(&[vec![0.0], vec![1.0]], 1);
    assert_eq!((m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]), (1.0, 0.0, 1.0, 1.0));
}

#[test]
fn interpolates_the_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (d, degree) in [(1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
        for _ in 0..20 {
            let pts = stencil(d, degree, &vec![0.2; d], 0.5, &mut rng);
            let ys: Vec<Vec<f64>> = pts.iter().map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
            for (p, y) in pts.iter().zip(&ys) {
                let v = interp_multivariate(&pts, &ys, p);
                assert!(dist(&v, y) <= 1e-8, "d={d} degree={degree}: {v:?} vs {y:?}");
            }
        }
    }
}

#[test]
fn normalization_is_location_and_scale_free() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (d, degree) in [(1, 2), (2, 2), (3, 1)] {
        let pts = stencil(d, degree, &vec![0.0; d], 1.0, &mut rng);
        let (eta, normed) = normalize(&pts).unwrap();
        let diam = normed.iter().flat_map(|a| normed.iter().map(move |b| dist(a, b))).fold(0.0, f64::max);
        assert!((diam - 1.0).abs() <= 1e-12);
        for j in 0..d {
            assert!(normed.iter().map(|p| p[j]).sum::<f64>().abs() <= 1e-12);
        }
        assert!(eta.diameter > 0.0);
        let s = stability_norm(&pts, degree);
        let oracle = 1.0 / min_singular_value(&normalized_vandermonde(&pts, degree));
        assert!((s - oracle).abs() <= 1e-8 * oracle, "{s} vs {oracle}");
        for (shift, scale) in [(3.0, 1.0), (-1.0, 1e-3), (0.5, 250.0)] {
            let moved: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| scale * v + shift).collect()).collect();
            let sm = stability_norm(&moved, degree);
            assert!((sm - s).abs() <= 1e-8 * s, "{sm} vs {s}");
        }
    }
}

#[test]
fn collinear_stencil_is_unstable() {
    let pts: Vec<Vec<f64>> = (0..6).map(|k| vec![k as f64, 2.0 * k as f64]).collect();
    assert!(stability_norm(&pts, 2).is_infinite());
    assert!(stability_norm(&pts[..5], 2).is_infinite());
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[test]
fn lebesgue_constant_is_bounded_by_stability() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (d, degree) in [(1, 2), (1, 4), (2, 1), (2, 2), (3, 1)] {
        let n = n_of(d, degree);
        for _ in 0..10 {
            let pts = stencil(d, degree, &vec![0.0; d], 1.0, &mut rng);
            let s = stability_norm(&pts, degree);
            let mut c = 0.0;
            for k in 0..n {
                let e: Vec<Vec<f64>> = (0..n).map(|j| vec![if j == k { 1.0 } else { 0.0 }]).collect();
                let sup = (0..400).map(|_| interp_multivariate(&pts, &e, &hull_point(&pts, &mut rng))[0].abs()).fold(0.0, f64::max);
                c += sup;
            }
            c /= factorial(degree + 1);
            let bound = (n as f64).powf(1.5) / factorial(degree + 1) * s;
            assert!(c <= bound * 1.01, "d={d} degree={degree}: {c} > {bound}");
        }
    }
}

#[test]
fn smooth_functions_are_approximated() {
    // g(x) = sin(a . x) has |D^k g| <= |a|^k.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for (d, degree) in [(1, 3), (2, 2), (2, 3), (3, 1)] {
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let g = |x: &[f64]| x.iter().zip(&a).map(|(u, v)| u * v).sum::<f64>().sin();
        let n = n_of(d, degree);
        for _ in 0..10 {
            let pts = stencil(d, degree, &vec![0.3; d], 0.05, &mut rng);
            let ys: Vec<Vec<f64>> = pts.iter().map(|p| vec![g(p)]).collect();
            let diam = pts.iter().flat_map(|p| pts.iter().map(move |q| dist(p, q))).fold(0.0, f64::max);
            let c = (n as f64).powf(1.5) / factorial(degree + 1) * stability_norm(&pts, degree);
            let bound = na.powi(degree as i32 + 1) * c * diam.powi(degree as i32 + 1);
            for _ in 0..200 {
                let x = hull_point(&pts, &mut rng);
                let err = (interp_multivariate(&pts, &ys, &x)[0] - g(&x)).abs();
                assert!(err <= bound + 1e-13, "d={d} degree={degree}: {err} > {bound}");
            }
        }
    }
}

#[test]
fn simplex_centroid_interior() {
    for d in 1..=3 {
        let mut simplex = vec![vec![0.0; d]];
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            simplex.push(e);
        }
        let centroid: Vec<f64> = (0..d).map(|j| simplex.iter().map(|p| p[j]).sum::<f64>() / (d + 1) as f64).collect();
        assert!(mu_interior_contains(&simplex, 0.1, &centroid).unwrap(), "d={d}");
        assert!(!mu_interior_contains(&simplex, 0.6, &centroid).unwrap(), "d={d}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn affine_invariance(seed in 0u64..10_000, dd in 0usize..4, shift in -3.0f64..3.0, scale in 0.2f64..5.0, rot in 0.0f64..std::f64::consts::TAU) {
        let (d, degree) = [(1, 2), (2, 1), (2, 2), (3, 1)][dd];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = stencil(d, degree, &vec![0.0; d], 1.0, &mut rng);
        prop_assume!(stability_norm(&pts, degree) < 1e4);
        let ys: Vec<Vec<f64>> = pts.iter().map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
        let map = |p: &[f64]| -> Vec<f64> {
            let mut q: Vec<f64> = p.iter().map(|v| scale * v + shift).collect();
            if d >= 2 {
                let (c, s) = (rot.cos(), rot.sin());
                let (u, v) = (q[0], q[1]);
                q[0] = c * u - s * v;
                q[1] = s * u + c * v;
            }
            q
        };
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| map(p)).collect();
        let z: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = interp_multivariate(&pts, &ys, &z)[0];
        let b = interp_multivariate(&moved, &ys, &map(&z))[0];
        prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{} vs {}", a, b);
    }

    #[test]
    fn interior_ball_lies_in_hull(seed in 0u64..10_000, d in 1usize..=3, mu in 0.0f64..0.3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let simplex: Vec<Vec<f64>> = (0..=d).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let x = hull_point(&simplex, &mut rng);
        let Some(bary) = barycentric(&simplex, &x) else { return Ok(()); };
        prop_assert!(bary.iter().all(|b| *b >= -1e-9));
        if mu_interior_contains(&simplex, mu, &x).unwrap() {
            let diam = simplex.iter().flat_map(|p| simplex.iter().map(move |q| dist(p, q))).fold(0.0, f64::max);
            for _ in 0..50 {
                let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let nu = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + 0.999 * mu * diam * b / nu).collect();
                let by = barycentric(&simplex, &y).unwrap();
                prop_assert!(by.iter().all(|b| *b >= -1e-9), "{:?}", by);
            }
        }
        // Far outside the hull is never contained.
        let far: Vec<f64> = x.iter().map(|v| v + 10.0).collect();
        prop_assert!(!mu_interior_contains(&simplex, mu, &far).unwrap());
    }
}
