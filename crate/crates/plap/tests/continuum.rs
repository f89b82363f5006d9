use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use plap::continuum::{
    c_p, closed_form_1d, el_residual, from_fn, i_p, infinity_laplacian, isotropic_moment, laplacian, log_family, spike_family, spike_integral,
    tensor_contraction_check, Exponent, Linear, RadialPower, ScalarField,
};
use plap::density::{make_cluster_instance, DensityModel};
use plap::graph::EdgeKernel;
use plap::quad::QuadratureSpec;

const ADAPTIVE: QuadratureSpec = QuadratureSpec::Adaptive { tol: 1e-10 };

/// Midpoint rule on `[a, b]`.
fn midpoint(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|k| f(a + (k as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn c_p_examples() {
    assert_abs_diff_eq!(c_p(EdgeKernel::Indicator, 2, 1).unwrap(), 2.0 / 3.0, epsilon = 1e-10);
    assert_abs_diff_eq!(c_p(EdgeKernel::Indicator, 2, 2).unwrap(), PI / 4.0, epsilon = 1e-10);
    assert_abs_diff_eq!(c_p(EdgeKernel::Indicator, 4, 1).unwrap(), 2.0 / 5.0, epsilon = 1e-10);
    // d = 3, p = 2: (1/3) 4π ∫ r^4 = 4π/15
    assert_abs_diff_eq!(c_p(EdgeKernel::Indicator, 2, 3).unwrap(), 4.0 * PI / 15.0, epsilon = 1e-10);
}

#[test]
fn c_p_gaussian_kernel() {
    for (p, d) in [(2u32, 1usize), (4, 1), (2, 2), (4, 3)] {
        let area = match d {
            1 => 2.0,
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        };
        let radial = midpoint(|r| r.powi((p as usize + d - 1) as i32) * (-0.5 * p as f64 * r * r).exp(), 0.0, 3.0, 200_000);
        let oracle = (d as f64).powf(-(p as f64) / 2.0) * area * radial;
        assert_abs_diff_eq!(c_p(EdgeKernel::gaussian(), p, d).unwrap(), oracle, epsilon = 1e-9);
    }
}

#[test]
fn i_p_examples() {
    let id = Linear { c: vec![1.0], c0: 0.0 };
    let e = i_p(&id, &DensityModel::uniform_unit(1), 2, &ADAPTIVE).unwrap();
    assert_abs_diff_eq!(e.value, 1.0, epsilon = 1e-9);

    let c = make_cluster_instance(0.25).unwrap();
    let e = i_p(&id, &c.density, 2, &ADAPTIVE).unwrap();
    assert_abs_diff_eq!(e.value, 0.5, epsilon = 1e-9);

    for eps in [0.25, 0.1, 0.01] {
        let c = make_cluster_instance(eps).unwrap();
        let e = i_p(&c.target, &c.density, 2, &ADAPTIVE).unwrap();
        assert_abs_diff_eq!(e.value, 2.0, epsilon = 1e-8);
    }
}

#[test]
fn i_p_quadratures_agree() {
    // f = x0^2 + x0 x1 on the unit square: ∫ (2x0 + x1)^2 + x0^2 = 8/3 + 1/3
    let f = from_fn(2, |x: &[f64]| x[0] * x[0] + x[0] * x[1]);
    let u = DensityModel::uniform_unit(2);
    let g = i_p(&f, &u, 2, &QuadratureSpec::TensorGrid { points_per_axis: 16 }).unwrap();
    assert_abs_diff_eq!(g.value, 3.0, epsilon = 1e-6);
    let m = i_p(&f, &u, 2, &QuadratureSpec::MonteCarlo { samples: 200_000, seed: 3 }).unwrap();
    assert!((m.value - 3.0).abs() < 4.0 * m.error, "{m:?}");
    assert!(i_p(&f, &u, 2, &ADAPTIVE).is_err());
}

#[test]
fn i_p_rotation_invariance() {
    let mu = DensityModel::GaussianMixture { means: vec![vec![0.0, 0.0]], stddevs: vec![0.7], weights: vec![1.0] };
    let quad = QuadratureSpec::TensorGrid { points_per_axis: 60 };
    let base = |x: &[f64]| x[0] * x[0] * x[1] + 0.5 * x[1] + (x[0] - 0.3).powi(2);
    let f = from_fn(2, base);
    let reference = i_p(&f, &mu, 2, &quad).unwrap().value;
    for t in [0.3, 1.1, 2.5] {
        let (c, s) = (f64::cos(t), f64::sin(t));
        let rotated = from_fn(2, move |x: &[f64]| base(&[c * x[0] - s * x[1], s * x[0] + c * x[1]]));
        let v = i_p(&rotated, &mu, 2, &quad).unwrap().value;
        assert!((v / reference - 1.0).abs() < 1e-6, "angle {t}: {v} vs {reference}");
    }
}

#[test]
fn closed_form_examples() {
    let u = DensityModel::Uniform { lo: vec![-0.5], hi: vec![1.5] };
    for p in [Exponent::Finite(2), Exponent::Finite(4), Exponent::Infinity] {
        let f = closed_form_1d(&u, &[(0.0, 0.0), (1.0, 1.0)], p).unwrap();
        for x in [0.0, 0.25, 0.6, 1.0] {
            assert_abs_diff_eq!(f.value(&[x]), x, epsilon = 1e-12);
        }
        assert_eq!(f.value(&[-0.3]), 0.0);
        assert_eq!(f.value(&[1.3]), 1.0);
    }

    let c = make_cluster_instance(0.25).unwrap();
    let f = closed_form_1d(&c.density, &[(-1.0, -1.0), (1.0, 1.0)], Exponent::Finite(2)).unwrap();
    for x in [-0.7, -0.1, 0.2, 0.9] {
        assert_abs_diff_eq!(f.value(&[x]), x, epsilon = 1e-12);
    }

    let c = make_cluster_instance(0.01).unwrap();
    let f = closed_form_1d(&c.density, &[(-1.0, -1.0), (1.0, 1.0)], Exponent::Finite(2)).unwrap();
    let ratio = f.slope(0.0) / f.slope(0.5);
    assert_abs_diff_eq!(ratio, (c.a / c.b).powi(2), epsilon = 1e-9);
    assert_abs_diff_eq!(ratio, 25.41, epsilon = 0.01);
    // the slopes integrate to the label gap
    let total = 2.0 * 0.99 * f.slope(0.5) + 0.02 * f.slope(0.0);
    assert_abs_diff_eq!(total, 2.0, epsilon = 1e-12);

    let inf = closed_form_1d(&c.density, &[(-1.0, -1.0), (1.0, 1.0)], Exponent::Infinity).unwrap();
    assert_abs_diff_eq!(inf.value(&[0.37]), 0.37, epsilon = 1e-12);

    assert!(closed_form_1d(&c.density, &[(0.0, 1.0)], Exponent::Finite(2)).is_err());
    assert!(closed_form_1d(&c.density, &[(0.5, 1.0), (0.0, 0.0)], Exponent::Finite(2)).is_err());
    let gap = DensityModel::Uniform { lo: vec![0.0], hi: vec![1.0] };
    assert!(closed_form_1d(&gap, &[(-1.0, 0.0), (2.0, 1.0)], Exponent::Finite(2)).is_err());
}

#[test]
fn closed_form_solves_the_ode() {
    let c = make_cluster_instance(0.01).unwrap();
    let f = closed_form_1d(&c.density, &[(-1.0, -1.0), (1.0, 1.0)], Exponent::Finite(2)).unwrap();
    assert!(el_residual(&f, &c.density, Exponent::Finite(2), &[0.5], 1e-4).unwrap().abs() <= 1e-4);

    // smooth density, several labels: (p − 1) μ f'' + 2 μ' f' = 0 off the labels
    let m = DensityModel::two_gaussians_1d(0.0, 4.0, 1.0);
    let labels = [(-1.0, -1.0), (2.0, 0.5), (5.0, 1.0)];
    for p in [2u32, 4] {
        let f = closed_form_1d(&m, &labels, Exponent::Finite(p)).unwrap();
        let mut checked = 0;
        for k in 0..100 {
            let x = -0.98 + 5.96 * k as f64 / 99.0;
            if labels.iter().any(|l| (x - l.0).abs() < 1e-3) {
                continue;
            }
            let r = el_residual(&f, &m, Exponent::Finite(p), &[x], 1e-4).unwrap();
            assert!(r.abs() <= 1e-4, "p = {p}, x = {x}: residual {r}");
            checked += 1;
        }
        assert!(checked >= 95);
        for l in labels {
            assert_abs_diff_eq!(f.value(&[l.0]), l.1, epsilon = 1e-12);
        }
    }
}

#[test]
fn el_residual_examples() {
    let u = DensityModel::uniform_unit(2);
    let lin = Linear { c: vec![0.3, -2.0], c0: 1.0 };
    for p in [2, 4, 8] {
        assert_eq!(el_residual(&lin, &u, Exponent::Finite(p), &[0.3, 0.6], 1e-4).unwrap(), 0.0);
    }
    let sq = RadialPower { center: vec![0.0, 0.0], power: 2.0 };
    assert_abs_diff_eq!(el_residual(&sq, &u, Exponent::Finite(2), &[0.3, 0.6], 1e-4).unwrap(), 4.0, epsilon = 1e-12);
    assert_abs_diff_eq!(el_residual(&sq, &u, Exponent::Finite(4), &[0.3, 0.6], 1e-4).unwrap(), 8.0, epsilon = 1e-12);
    let c = make_cluster_instance(0.1).unwrap();
    let f = closed_form_1d(&c.density, &[(-1.0, -1.0), (1.0, 1.0)], Exponent::Finite(2)).unwrap();
    assert!(el_residual(&f, &c.density, Exponent::Finite(2), &[0.1], 1e-4).is_err());
}

#[test]
fn infinity_laplacian_examples() {
    let r = RadialPower::norm(3);
    assert_eq!(infinity_laplacian(&r, &[1.0, 0.0, 0.0], 1e-4), 0.0);
    assert_abs_diff_eq!(laplacian(&r, &[1.0, 0.0, 0.0], 1e-4), 2.0, epsilon = 1e-12);
    let sq = RadialPower { center: vec![0.0; 3], power: 2.0 };
    for x in [[1.0, 0.0, 0.0], [0.3, -0.2, 0.9]] {
        assert_abs_diff_eq!(infinity_laplacian(&sq, &x, 1e-4), 2.0, epsilon = 1e-12);
    }
    let k = from_fn(3, |_: &[f64]| 4.2);
    assert_eq!(infinity_laplacian(&k, &[0.1, 0.2, 0.3], 1e-4), 0.0);

    // finite differences on a closure agree with the analytic Hessian
    let blind = from_fn(2, |x: &[f64]| x[0].powi(3) + x[0] * x[1] * x[1]);
    let x = [0.4, -0.7];
    let (g, h) = ([3.0 * 0.16 + 0.49, 2.0 * 0.4 * -0.7], [6.0 * 0.4, 2.0 * -0.7, 2.0 * -0.7, 2.0 * 0.4]);
    let q = (g[0] * (h[0] * g[0] + h[1] * g[1]) + g[1] * (h[2] * g[0] + h[3] * g[1])) / (g[0] * g[0] + g[1] * g[1]);
    assert_abs_diff_eq!(infinity_laplacian(&blind, &x, 1e-4), q, epsilon = 1e-6);
}

#[test]
fn spike_family_scaling() {
    let mu = DensityModel::Uniform { lo: vec![-1.0; 3], hi: vec![1.0; 3] };
    let eps = [0.1, 0.05, 0.025];
    let vals: Vec<_> = eps.iter().map(|&e| spike_family(2, 3, e, &mu, &ADAPTIVE).unwrap()).collect();
    for w in vals.windows(2) {
        assert!((w[1].value / w[0].value / 0.5 - 1.0).abs() < 0.05, "{} {}", w[0].value, w[1].value);
    }
    for (v, e) in vals.iter().zip(eps) {
        assert!(v.value <= v.paper_bound * (1.0 + 1e-9));
        // exact: μ² ε^{-2} vol(B(0, ε)) with μ = 1/8
        let exact = (1.0 / 64.0) * e.powi(-2) * 4.0 / 3.0 * PI * e.powi(3);
        assert_abs_diff_eq!(v.value, exact, epsilon = 1e-8 * exact);
    }
    assert!(spike_family(4, 3, 0.1, &mu, &ADAPTIVE).is_err());
}

#[test]
fn spike_contrast_above_dimension() {
    let mu = DensityModel::Uniform { lo: vec![-1.0; 3], hi: vec![1.0; 3] };
    let v: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&e| spike_integral(4, 3, e, &mu, &ADAPTIVE).unwrap().value).collect();
    assert!(v[1] > 1.9 * v[0] && v[2] > 1.9 * v[1], "{v:?}");
}

#[test]
fn log_family_is_bounded() {
    let mu = DensityModel::Uniform { lo: vec![-1.0; 2], hi: vec![1.0; 2] };
    let normalized: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&e| {
            let v = log_family(2, e, &mu, &ADAPTIVE).unwrap();
            // radial oracle: μ² 2π ∫₀¹ (2r/((r²+ε)L))² r dr, L = log((1+ε)/ε)
            let l = ((1.0 + e) / e).ln();
            let oracle = (1.0f64 / 16.0) * 2.0 * PI * 4.0 / (l * l) * 0.5 * (((1.0 + e) / e).ln() - 1.0 / (1.0 + e));
            assert!((v.value / oracle - 1.0).abs() < 1e-7, "eps {e}: {} vs {oracle}", v.value);
            v.value * l
        })
        .collect();
    let spread = normalized.iter().cloned().fold(0.0, f64::max) / normalized.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 2.0, "{normalized:?}");
}

#[test]
fn tensor_identity_examples() {
    let ind = |r: f64| if r <= 1.0 { 1.0 } else { 0.0 };
    let t = tensor_contraction_check(&ind, 1.0, 2, 2, &[1.0, 0.0], 400_000, 5).unwrap();
    // (1/2) ∫_B ‖z‖² = (1/2)(π/2), which is also ∫_B z₁²
    assert_abs_diff_eq!(t.rhs, PI / 4.0, epsilon = 1e-9);
    assert!((t.lhs - t.rhs).abs() <= 3.0 * t.mc_stderr, "{t:?}");

    let t = tensor_contraction_check(&ind, 1.0, 3, 3, &[0.3, -1.0, 0.5], 400_000, 6).unwrap();
    assert_eq!(t.rhs, 0.0);
    assert!(t.lhs.abs() <= 3.0 * t.mc_stderr, "{t:?}");

    let t = tensor_contraction_check(&ind, 1.0, 2, 3, &[0.0; 3], 1000, 7).unwrap();
    assert_eq!((t.lhs, t.rhs), (0.0, 0.0));
}

#[test]
fn isotropic_moments() {
    // E θ₁² = 1/d, E θ₁⁴ = 3/(d(d+2))
    for d in 1..6 {
        assert_abs_diff_eq!(isotropic_moment(2, d), 1.0 / d as f64, epsilon = 1e-15);
        assert_abs_diff_eq!(isotropic_moment(4, d), 3.0 / (d * (d + 2)) as f64, epsilon = 1e-15);
        assert_eq!(isotropic_moment(3, d), 0.0);
    }
    // at p = 4 the exact constant differs from d^{-p/2} unless d = 1
    let ind = |r: f64| if r <= 1.0 { 1.0 } else { 0.0 };
    let t = tensor_contraction_check(&ind, 1.0, 4, 2, &[1.0, 0.0], 400_000, 8).unwrap();
    assert!((t.lhs - t.rhs_isotropic).abs() <= 3.0 * t.mc_stderr, "{t:?}");
    assert_abs_diff_eq!(t.rhs_isotropic / t.rhs, 4.0 * 3.0 / 8.0, epsilon = 1e-12);
}
