//! Spike families whose `I_p` tends to 0 when `p <= d`.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::error::{invalid, Result};
use crate::quad::{ball_volume, gauss_legendre, gauss_on, simpson_pieces, sphere_area, Estimate, QuadratureSpec};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeValue {
    /// `∫ ‖∇f_ε‖^p μ²`.
    pub value: f64,
    /// Quadrature error estimate of `value`.
    pub error: f64,
    /// The closed-form upper bound the family is compared against.
    pub paper_bound: f64,
}

/// Directions and weights integrating over the unit sphere.
fn sphere_rule(d: usize) -> Vec<(Vec<f64>, f64)> {
    use std::f64::consts::PI;
    match d {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => {
            let m = 96;
            (0..m)
                .map(|k| {
                    let t = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    (vec![t.cos(), t.sin()], 2.0 * PI / m as f64)
                })
                .collect()
        }
        3 => {
            let (zs, ws) = gauss_legendre(32);
            let m = 64;
            let mut out = Vec::new();
            for (z, w) in zs.iter().zip(&ws) {
                let s = (1.0 - z * z).sqrt();
                for k in 0..m {
                    let t = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    out.push((vec![s * t.cos(), s * t.sin(), *z], w * 2.0 * PI / m as f64));
                }
            }
            out
        }
        _ => {
            let mut r = rng::rng(0x5eed);
            let m = 8192;
            let w = sphere_area(d) / m as f64;
            (0..m)
                .map(|_| {
                    let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut r)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    (v.iter().map(|x| x / n).collect(), w)
                })
                .collect()
        }
    }
}

/// `∫_{B(c, R)} g(|x − c|) μ²(x) dx` in polar coordinates.
fn ball_integral(density: &DensityModel, center: &[f64], radius: f64, g: &dyn Fn(f64) -> f64, cuts: &[f64], quad: &QuadratureSpec) -> Result<Estimate> {
    quad.validate()?;
    let d = center.len();
    let mu2 = |x: &[f64]| {
        let m = density.density_unchecked(x);
        m * m
    };
    let mut all = vec![0.0, radius];
    all.extend(cuts.iter().filter(|c| **c > 0.0 && **c < radius));
    all.sort_by(f64::total_cmp);
    match *quad {
        QuadratureSpec::MonteCarlo { samples, seed } => {
            let mut r = rng::rng(seed);
            let vol = ball_volume(d) * radius.powi(d as i32);
            let vals: Vec<f64> = (0..samples)
                .map(|_| {
                    let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut r)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let rad = radius * rand::Rng::random::<f64>(&mut r).powf(1.0 / d as f64);
                    let x: Vec<f64> = center.iter().zip(&v).map(|(c, u)| c + rad * u / n).collect();
                    g(rad) * mu2(&x)
                })
                .collect();
            let (m, se) = crate::quad::mean_stderr(&vals);
            Ok(Estimate { value: vol * m, error: vol * se })
        }
        _ => {
            let rule = sphere_rule(d);
            let shell = |r: f64| -> f64 {
                if r == 0.0 {
                    return if d == 1 { 2.0 * g(0.0) * mu2(center) } else { 0.0 };
                }
                let s: f64 = rule
                    .iter()
                    .map(|(u, w)| {
                        let x: Vec<f64> = center.iter().zip(u).map(|(c, u)| c + r * u).collect();
                        w * mu2(&x)
                    })
                    .sum();
                g(r) * r.powi(d as i32 - 1) * s
            };
            if let QuadratureSpec::TensorGrid { points_per_axis } = *quad {
                let run = |n: usize| -> f64 { all.windows(2).map(|w| gauss_on(n, w[0], w[1]).iter().map(|(r, wt)| wt * shell(*r)).sum::<f64>()).sum() };
                let v = run(points_per_axis);
                let coarse = run((points_per_axis / 2).max(1));
                return Ok(Estimate { value: v, error: (v - coarse).abs() });
            }
            let QuadratureSpec::Adaptive { tol } = *quad else { unreachable!() };
            simpson_pieces(shell, &all, tol)
        }
    }
}

/// `I_p` of `f_ε = min{‖x − c‖/ε, 1}` for any `p`, with `c` the centroid of
/// the support; the bound is `μ_max² vol(B(0,1)) ε^{d−p}`.
pub fn spike_integral(p: u32, d: usize, epsilon: f64, density: &DensityModel, quad: &QuadratureSpec) -> Result<SpikeValue> {
    check(d, epsilon, density)?;
    let c = density.centroid();
    let s = epsilon.powi(-(p as i32));
    let e = ball_integral(density, &c, epsilon, &|_| s, &[], quad)?;
    let mmax = density.max_density();
    let paper_bound = mmax * mmax * ball_volume(d) * epsilon.powi(d as i32 - p as i32);
    Ok(SpikeValue { value: e.value, error: e.error, paper_bound })
}

/// `I_d` of `f_ε = log((‖x − c‖² + ε)/ε) / log((1 + ε)/ε)` over `B(c, 1)`.
///
/// `paper_bound` is `d μ_max² vol(B(0,1)) / (2 L^{d−1})` with
/// `L = log((1+ε)/ε)`, which omits the factor `2^d` from `∇‖x‖² = 2x`; the
/// value here is the true integral.
pub fn log_family(d: usize, epsilon: f64, density: &DensityModel, quad: &QuadratureSpec) -> Result<SpikeValue> {
    check(d, epsilon, density)?;
    let c = density.centroid();
    let l = ((1.0 + epsilon) / epsilon).ln();
    let g = move |r: f64| (2.0 * r / ((r * r + epsilon) * l)).powi(d as i32);
    let cuts = [0.25 * epsilon.sqrt(), epsilon.sqrt(), 4.0 * epsilon.sqrt()];
    let e = ball_integral(density, &c, 1.0, &g, &cuts, quad)?;
    let mmax = density.max_density();
    let paper_bound = d as f64 * mmax * mmax * ball_volume(d) / (2.0 * l.powi(d as i32 - 1));
    Ok(SpikeValue { value: e.value, error: e.error, paper_bound })
}

/// The degenerate family for `p <= d`: the spike for `p < d`, the log
/// family for `p = d`.
pub fn spike_family(p: u32, d: usize, epsilon: f64, density: &DensityModel, quad: &QuadratureSpec) -> Result<SpikeValue> {
    if p as usize > d {
        return Err(invalid("p", format!("p = {p} > d = {d}: the family is not degenerate")));
    }
    if p as usize == d {
        log_family(d, epsilon, density, quad)
    } else {
        spike_integral(p, d, epsilon, density, quad)
    }
}

fn check(d: usize, epsilon: f64, density: &DensityModel) -> Result<()> {
    if density.dim() != d {
        return Err(crate::error::Error::Dimension { expected: d, got: density.dim() });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", format!("{epsilon} not in (0, 1)")));
    }
    Ok(())
}
