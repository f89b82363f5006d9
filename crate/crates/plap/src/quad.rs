//! Quadrature: adaptive Simpson, Gauss–Legendre rules, Monte Carlo.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How an integral is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum QuadratureSpec {
    /// Adaptive Simpson to an absolute tolerance (1D).
    Adaptive { tol: f64 },
    /// Tensor Gauss–Legendre grid.
    TensorGrid { points_per_axis: usize },
    /// Plain Monte Carlo.
    MonteCarlo { samples: usize, seed: u64 },
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            QuadratureSpec::Adaptive { tol } => tol > 0.0,
            QuadratureSpec::TensorGrid { points_per_axis } => points_per_axis > 0,
            QuadratureSpec::MonteCarlo { samples, .. } => samples > 1,
        };
        if ok {
            Ok(())
        } else {
            Err(crate::error::invalid("quad", "tolerances and counts must be positive"))
        }
    }
}

/// An integral with its error estimate (one standard error for Monte Carlo).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const MAX_DEPTH: u32 = 50;

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut err = 0.0;
    let mut failed = false;
    let v = simpson_rec(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut err, &mut failed);
    if failed || !v.is_finite() {
        return Err(Error::Quadrature { estimate: err, tol });
    }
    Ok(Estimate { value: v, error: err })
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err: &mut f64,
    failed: &mut bool,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 {
        *failed |= delta.abs() > 15.0 * tol;
        *err += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    // force a few levels so narrow features are not skipped
    if depth <= MAX_DEPTH - 4 && delta.abs() <= 15.0 * tol {
        *err += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, err, failed)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, err, failed)
}

/// Adaptive Simpson over consecutive pieces `[c_k, c_{k+1}]`.
pub fn simpson_pieces<F: Fn(f64) -> f64>(f: F, cuts: &[f64], tol: f64) -> Result<Estimate> {
    let pieces = (cuts.len().max(2) - 1) as f64;
    let mut out = Estimate { value: 0.0, error: 0.0 };
    for w in cuts.windows(2) {
        let e = simpson(&f, w[0], w[1], tol / pieces)?;
        out.value += e.value;
        out.error += e.error;
    }
    Ok(out)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule of `n` points mapped to `[a, b]`.
pub fn gauss_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(&w).map(|(x, w)| (c + r * x, r * w)).collect()
}

/// Mean and standard error of a sample.
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// `2 π^{d/2} / Γ(d/2)`, the area of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    use std::f64::consts::PI;
    // Γ(d/2) by recursion from Γ(1) = 1, Γ(1/2) = √π
    let mut g = if d.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut k = if d.is_multiple_of(2) { 1.0 } else { 0.5 };
    while k < d as f64 / 2.0 - 1e-9 {
        g *= k;
        k += 1.0;
    }
    2.0 * PI.powf(d as f64 / 2.0) / g
}

/// Volume of the unit ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_peak() {
        let e = simpson(|x| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((e.value - 9.0).abs() < 1e-12);
        let e = simpson(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-8).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((e.value - exact).abs() < 1e-6);
    }

    #[test]
    fn gauss_exact_to_degree() {
        let r = gauss_on(5, 0.0, 2.0);
        let v: f64 = r.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-10);
    }

    #[test]
    fn sphere_constants() {
        use std::f64::consts::PI;
        assert!((sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((ball_volume(4) - PI * PI / 2.0).abs() < 1e-14);
    }
}
