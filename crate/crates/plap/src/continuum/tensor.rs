//! Monte Carlo check of the identity `∫ w(‖z‖)⟨u, z⟩^p dz = d^{−p/2} (∫ w(‖z‖)‖z‖^p dz) ‖u‖^p`.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quad::{ball_volume, mean_stderr, simpson, sphere_area};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorCheck {
    /// Monte Carlo estimate of `∫ w(‖z‖)⟨u, z⟩^p dz`.
    pub lhs: f64,
    /// `d^{−p/2} M_p ‖u‖^p` for even `p`, 0 for odd `p`.
    pub rhs: f64,
    pub mc_stderr: f64,
    /// `E[θ₁^p] M_p ‖u‖^p` with `θ` uniform on the sphere, the exact value.
    pub rhs_isotropic: f64,
}

/// `E[θ₁^p]` for `θ` uniform on the unit sphere of `R^d`:
/// `(p−1)!! / (d (d+2) ⋯ (d+p−2))` for even `p`, 0 for odd.
pub fn isotropic_moment(p: u32, d: usize) -> f64 {
    if p % 2 == 1 {
        return 0.0;
    }
    let mut m = 1.0;
    for k in 0..p / 2 {
        m *= (2 * k + 1) as f64 / (d as f64 + 2.0 * k as f64);
    }
    m
}

/// `w` is a radial weight vanishing beyond `support`.
pub fn tensor_contraction_check(
    w: &dyn Fn(f64) -> f64,
    support: f64,
    p: u32,
    d: usize,
    u: &[f64],
    mc_samples: usize,
    seed: u64,
) -> Result<TensorCheck> {
    if u.len() != d || d == 0 {
        return Err(crate::error::Error::Dimension { expected: d, got: u.len() });
    }
    if !(support > 0.0) || mc_samples < 2 {
        return Err(invalid("mc_samples", "need positive support and at least two samples"));
    }
    let mut r = rng::rng(seed);
    let vol = ball_volume(d) * support.powi(d as i32);
    let vals: Vec<f64> = (0..mc_samples)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut r)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let rad = support * rand::Rng::random::<f64>(&mut r).powf(1.0 / d as f64);
            let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() * rad / n;
            w(rad) * dot.powi(p as i32)
        })
        .collect();
    let (m, se) = mean_stderr(&vals);
    let moment = sphere_area(d) * simpson(|t| w(t) * t.powi((p as usize + d - 1) as i32), 0.0, support, 1e-12)?.value;
    let un = u.iter().map(|x| x * x).sum::<f64>().sqrt().powi(p as i32);
    let rhs = if p.is_multiple_of(2) { (d as f64).powf(-(p as f64) / 2.0) * moment * un } else { 0.0 };
    Ok(TensorCheck { lhs: vol * m, rhs, mc_stderr: vol * se, rhs_isotropic: isotropic_moment(p, d) * moment * un })
}
