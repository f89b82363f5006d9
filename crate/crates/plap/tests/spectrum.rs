use approx::assert_abs_diff_eq;
use plap::density::{make_cluster_instance, DensityModel};
use plap::spectrum::{
    bound_k0, critical_radius, eigen_bound, eigenvalues, kernel_k, rate_bounds, EigenSource, EigenSum, KernelK,
};
use rand::{Rng, SeedableRng};

const PI: f64 = std::f64::consts::PI;

fn uniform_pm1() -> DensityModel {
    DensityModel::Uniform { lo: vec![-1.0], hi: vec![1.0] }
}

#[test]
fn kernel_examples() {
    let u = uniform_pm1();
    assert_abs_diff_eq!(kernel_k(&u, 0.0, 0.0).unwrap(), 2.0, epsilon = 1e-14);
    for (x, y) in [(-0.5, 0.5), (0.3, 0.1), (-1.0, 1.0), (0.9, 0.9)] {
        assert_abs_diff_eq!(kernel_k(&u, x, y).unwrap(), 2.0 - 2.0 * (x - y).abs(), epsilon = 1e-14);
    }
    let c = make_cluster_instance(0.25).unwrap();
    assert_abs_diff_eq!(kernel_k(&c.density, 0.0, 0.0).unwrap(), 2.0, epsilon = 1e-14);
    assert!(kernel_k(&u, 1.1, 0.0).is_err());
    assert!(kernel_k(&u, 0.0, -1.5).is_err());
}

#[test]
fn kernel_on_mixture_matches_quadrature() {
    let m = DensityModel::GaussianMixture { means: vec![vec![-0.5], vec![0.5]], stddevs: vec![0.6, 0.6], weights: vec![0.5, 0.5] };
    let k = KernelK::new(&m).unwrap();
    let inv2 = |t: f64| 1.0 / m.density(&[t]).unwrap().powi(2);
    let integral = |a: f64, b: f64| {
        let steps = 20_000;
        let h = (b - a) / steps as f64;
        (0..steps).map(|i| inv2(a + (i as f64 + 0.5) * h) * h).sum::<f64>()
    };
    let total = integral(-1.0, 1.0);
    for (x, y) in [(-0.7, 0.2), (0.0, 0.9), (0.4, 0.4)] {
        let lo = f64::min(x, y);
        let hi = f64::max(x, y);
        let expect = 0.25 * total - 0.5 * integral(lo, hi);
        assert!((k.k(x, y).unwrap() - expect).abs() < 1e-6, "({x}, {y})");
    }
}

#[test]
fn kernel_is_symmetric_and_psd() {
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for eps in [0.05, 0.2] {
        let k = KernelK::new(&make_cluster_instance(eps).unwrap().density).unwrap();
        for _ in 0..5 {
            let xs: Vec<f64> = (0..50).map(|_| r.random_range(-1.0..=1.0)).collect();
            let g = k.gram(&xs).unwrap();
            assert_eq!(g, g.transpose());
            let lmin = g.clone().symmetric_eigen().eigenvalues.min();
            assert!(lmin >= -1e-10 * g.trace(), "{lmin}");
        }
    }
}

/// Roots of `sin u sin v − c cos u cos v` counted by sign changes on a grid.
fn pole_free_root_count(eps: f64, lo: f64, hi: f64) -> usize {
    let c = make_cluster_instance(eps).unwrap();
    let (a, b) = (c.a, c.b);
    let ratio = (b / a).powf(1.5);
    let f = |x: f64| {
        let (u, v) = (eps * x / b.sqrt(), (1.0 - eps) * x / a.sqrt());
        u.sin() * v.sin() - ratio * u.cos() * v.cos()
    };
    let steps = 200_000;
    let h = (hi - lo) / steps as f64;
    (0..steps).filter(|&i| f(lo + i as f64 * h).signum() != f(lo + (i + 1) as f64 * h).signum()).count()
}

#[test]
fn eigenvalue_examples() {
    for eps in [0.3, 0.1, 0.04, 0.01, 0.0025] {
        let s = eigenvalues(eps, 3).unwrap();
        assert!(s.gamma(0, 0).unwrap() <= 1.26, "eps {eps}");
        for e in &s.values {
            assert!(s.residual(e.x).abs() <= 1e-8, "eps {eps} residual at {}", e.x);
            assert!(e.gamma > 0.0);
        }
    }
    let s = eigenvalues(1e-4, 0).unwrap();
    assert!((0.892..=0.899).contains(&s.roots[0]), "x0 = {}", s.roots[0]);
}

#[test]
fn eigenvalues_are_every_root() {
    for eps in [0.1, 0.04, 0.01] {
        let s = eigenvalues(eps, 2).unwrap();
        let end = 3.0 * s.period;
        assert_eq!(s.values.len(), pole_free_root_count(eps, 1e-9, end), "eps {eps}");
        assert_eq!(s.roots.len(), pole_free_root_count(eps, 1e-9, s.period), "eps {eps}");
        assert!(s.values.windows(2).all(|w| w[0].x < w[1].x));
        // one root between consecutive poles of the fast tangent, give or take the edges
        let per_period = s.roots.len() as f64;
        assert!((per_period - s.period_ratio).abs() <= 1.5, "eps {eps}: {per_period} roots, ratio {}", s.period_ratio);
    }
}

#[test]
fn eigenvalues_under_bounds() {
    for eps in [0.04, 0.01] {
        let s = eigenvalues(eps, 5).unwrap();
        let mut checked = 0;
        for e in s.values.iter().filter(|e| (e.k, e.j) != (0, 0)) {
            if let Ok(b) = eigen_bound(eps, e.k, e.j) {
                assert!(e.gamma <= b * (1.0 + 1e-9), "eps {eps} ({}, {}): {} > {b}", e.k, e.j, e.gamma);
                checked += 1;
            }
        }
        assert!(checked > 50);
        for k in 0..s.roots.len() {
            let col: Vec<f64> = (0..=5).filter_map(|j| s.gamma(k, j)).collect();
            assert!(col.windows(2).all(|w| w[1] <= w[0]), "eps {eps} k {k}");
        }
    }
}

#[test]
fn x0_increases_with_epsilon() {
    let x0: Vec<f64> = [1e-4, 1e-3, 0.01, 0.1, 0.3].iter().map(|&e| eigenvalues(e, 0).unwrap().roots[0]).collect();
    assert!(x0.windows(2).all(|w| w[0] < w[1]), "{x0:?}");
}

#[test]
fn bound_examples() {
    assert_eq!(eigen_bound(0.1, 0, 0).unwrap(), 1.26);
    for eps in [0.3, 0.01, 1e-4] {
        assert_abs_diff_eq!(eigen_bound(eps, 1, 0).unwrap(), 8.0 / (PI * PI), epsilon = 1e-15);
    }
    assert_abs_diff_eq!(eigen_bound(0.01, 0, 1).unwrap(), 1e-3 / (PI * PI), epsilon = 1e-15);
    assert_abs_diff_eq!(eigen_bound(0.01, 0, 1).unwrap(), 1.0132e-4, epsilon = 1e-8);
    let k0 = bound_k0(0.01);
    assert!(eigen_bound(0.01, 2 * k0 - 1, 0).is_ok());
    assert!(eigen_bound(0.01, 2 * k0, 0).is_err());
    assert!(eigen_bound(0.5, 0, 0).is_err());
}

#[test]
fn critical_radius_examples() {
    let zero = EigenSum::new(&EigenSource::Values(vec![0.0; 10])).unwrap();
    assert_eq!(critical_radius(&zero, 100, 1.0, 2.0).unwrap(), 1e-8);

    let one = EigenSum::new(&EigenSource::Values(vec![1e6])).unwrap();
    for (n, sigma, r) in [(100, 1.0, 2.0), (1000, 0.5, 1.0), (7, 2.0, 3.0)] {
        let expect = sigma / r * (2.0 / n as f64).sqrt();
        assert_abs_diff_eq!(critical_radius(&one, n, sigma, r).unwrap(), expect, epsilon = 1e-9);
    }
    assert!(critical_radius(&one, 0, 1.0, 1.0).is_err());
    assert!(critical_radius(&one, 10, 0.0, 1.0).is_err());
    // no crossing below 10
    assert!(critical_radius(&EigenSum::new(&EigenSource::Values(vec![1e12])).unwrap(), 1, 1e6, 1.0).is_err());
}

#[test]
fn critical_radius_scaling() {
    let sum = EigenSum::new(&EigenSource::Lemma3Bounds { epsilon: 0.01 }).unwrap();
    let scaled: Vec<f64> = [100, 1000, 10_000]
        .iter()
        .map(|&n| {
            let d = critical_radius(&sum, n, 1.0, 2.0).unwrap();
            d * d * (4.0 * n as f64).powf(2.0 / 3.0)
        })
        .collect();
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi / lo <= 2.0, "{scaled:?}");

    let mut prev = f64::INFINITY;
    for n in [10, 100, 1000, 10_000, 100_000] {
        let d = critical_radius(&sum, n, 1.0, 2.0).unwrap();
        assert!(d <= prev);
        prev = d;
    }
    let mut prev = 0.0;
    for sigma in [0.1, 0.5, 1.0, 2.0] {
        let d = critical_radius(&sum, 1000, sigma, 2.0).unwrap();
        assert!(d >= prev);
        prev = d;
    }
}

#[test]
fn critical_radius_is_free_of_epsilon() {
    let d: Vec<f64> = [0.04, 0.01, 0.0025].iter().map(|&e| rate_bounds(1000, 1.0, e).unwrap().delta_n).collect();
    let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi / lo < 1.5, "{d:?}");
}

#[test]
fn rate_examples() {
    let r = rate_bounds(1000, 1.0, 0.1).unwrap();
    assert_abs_diff_eq!(r.l2_rate, 1e-2, epsilon = 1e-15);
    assert_abs_diff_eq!(r.linf_rate, 0.01f64.powf(2.0 / 3.0), epsilon = 1e-15);
    assert_abs_diff_eq!(r.linf_rate, 0.0464, epsilon = 1e-4);

    let r = rate_bounds(500, 0.7, 1.0).unwrap();
    assert_abs_diff_eq!(r.l2_rate, r.linf_rate, epsilon = 1e-15);

    let a = rate_bounds(250, 1.3, 0.05).unwrap();
    let b = rate_bounds(1000, 1.3, 0.05).unwrap();
    let f = 4f64.powf(2.0 / 3.0);
    assert_abs_diff_eq!(a.l2_rate / b.l2_rate, f, epsilon = 1e-12);
    assert_abs_diff_eq!(a.linf_rate / b.linf_rate, f, epsilon = 1e-12);
    for v in [a.delta_n, a.l2_rate, a.linf_rate] {
        assert!(v > 0.0);
    }
}
