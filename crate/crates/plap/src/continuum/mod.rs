//! The continuum side: `C_p`, the weighted functional `I_p`, the
//! Euler–Lagrange residual, 1D closed-form minimizers, degenerate families
//! and the isotropic tensor identity.

mod degeneracy;
mod tensor;

pub use degeneracy::{log_family, spike_family, spike_integral, SpikeValue};
pub use tensor::{isotropic_moment, tensor_contraction_check, TensorCheck};

use serde::{Deserialize, Serialize};

use crate::density::DensityModel;
use crate::error::{invalid, Error, Result};
use crate::graph::EdgeKernel;
use crate::quad::{gauss_on, mean_stderr, simpson, sphere_area, Estimate, QuadratureSpec};
use crate::rng;

/// Exponent of the regularizer: finite `p >= 2` or `∞`.
///
/// Serialized as a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "ExponentRepr")]
pub enum Exponent {
    Finite(u32),
    Infinity,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Num(u32),
    Text(String),
}

impl TryFrom<ExponentRepr> for Exponent {
    type Error = String;
    fn try_from(r: ExponentRepr) -> std::result::Result<Self, String> {
        match r {
            ExponentRepr::Num(p) => Ok(Exponent::Finite(p)),
            ExponentRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Exponent> for ExponentRepr {
    fn from(e: Exponent) -> Self {
        match e {
            Exponent::Finite(p) => ExponentRepr::Num(p),
            Exponent::Infinity => ExponentRepr::Text("inf".into()),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            _ => s.parse().map(Exponent::Finite).map_err(|_| format!("`{s}` is neither an integer nor \"inf\"")),
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

/// A real function on `R^d`, optionally with analytic derivatives.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
    /// Row-major `d × d`.
    fn hessian(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
    /// Points (1D) where the field has kinks.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `⟨c, x⟩ + c0`.
#[derive(Clone, Debug)]
pub struct Linear {
    pub c: Vec<f64>,
    pub c0: f64,
}

impl ScalarField for Linear {
    fn dim(&self) -> usize {
        self.c.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.c0 + self.c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(self.c.clone())
    }
    fn hessian(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; self.c.len() * self.c.len()])
    }
}

/// `‖x − center‖^power`.
#[derive(Clone, Debug)]
pub struct RadialPower {
    pub center: Vec<f64>,
    pub power: f64,
}

impl RadialPower {
    pub fn norm(d: usize) -> Self {
        RadialPower { center: vec![0.0; d], power: 1.0 }
    }
    fn offset(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let z: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        (z, r)
    }
}

impl ScalarField for RadialPower {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.offset(x).1.powf(self.power)
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (z, r) = self.offset(x);
        if r == 0.0 {
            return None;
        }
        let s = self.power * r.powf(self.power - 2.0);
        Some(z.iter().map(|v| s * v).collect())
    }
    fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        // ∇² r^q = q r^{q-2} (I + (q-2) z zᵀ / r²)
        let (z, r) = self.offset(x);
        if r == 0.0 {
            return None;
        }
        let d = z.len();
        let q = self.power;
        let s = q * r.powf(q - 2.0);
        let mut h = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                h[a * d + b] = s * ((a == b) as u8 as f64 + (q - 2.0) * z[a] * z[b] / (r * r));
            }
        }
        Some(h)
    }
}

/// Wraps a closure; derivatives come from finite differences.
pub struct FnField<F> {
    d: usize,
    f: F,
}

pub fn from_fn<F: Fn(&[f64]) -> f64 + Send + Sync>(d: usize, f: F) -> FnField<F> {
    FnField { d, f }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> ScalarField for FnField<F> {
    fn dim(&self) -> usize {
        self.d
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

impl ScalarField for crate::density::TargetFunction {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x[0])
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![self.derivative(x[0])])
    }
    fn hessian(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0])
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.knots.clone()
    }
}

pub fn gradient_fd(f: &dyn ScalarField, x: &[f64], step: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|a| {
            y[a] = x[a] + step;
            let up = f.value(&y);
            y[a] = x[a] - step;
            let dn = f.value(&y);
            y[a] = x[a];
            (up - dn) / (2.0 * step)
        })
        .collect()
}

pub fn hessian_fd(f: &dyn ScalarField, x: &[f64], step: f64) -> Vec<f64> {
    let d = x.len();
    let f0 = f.value(x);
    let mut y = x.to_vec();
    let mut h = vec![0.0; d * d];
    for a in 0..d {
        y[a] = x[a] + step;
        let up = f.value(&y);
        y[a] = x[a] - step;
        let dn = f.value(&y);
        y[a] = x[a];
        h[a * d + a] = (up - 2.0 * f0 + dn) / (step * step);
        for b in a + 1..d {
            let mut s = 0.0;
            for (sa, sb, sign) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                y[a] = x[a] + sa * step;
                y[b] = x[b] + sb * step;
                s += sign * f.value(&y);
            }
            y[a] = x[a];
            y[b] = x[b];
            h[a * d + b] = s / (4.0 * step * step);
            h[b * d + a] = h[a * d + b];
        }
    }
    h
}

fn grad_or_fd(f: &dyn ScalarField, x: &[f64], step: f64) -> Vec<f64> {
    f.gradient(x).unwrap_or_else(|| gradient_fd(f, x, step))
}

/// `⟨∇f, ∇²f ∇f⟩ / ‖∇f‖²`, zero where the gradient vanishes.
pub fn infinity_laplacian(f: &dyn ScalarField, x: &[f64], fd_step: f64) -> f64 {
    let g = grad_or_fd(f, x, fd_step);
    let h = f.hessian(x).unwrap_or_else(|| hessian_fd(f, x, fd_step));
    quotient(&g, &h, 1.0)
}

fn quotient(g: &[f64], h: &[f64], scale: f64) -> f64 {
    let d = g.len();
    let gg: f64 = g.iter().map(|v| v * v).sum();
    if gg.sqrt() < 1e-12 * scale {
        return 0.0;
    }
    let mut q = 0.0;
    for a in 0..d {
        for b in 0..d {
            q += g[a] * h[a * d + b] * g[b];
        }
    }
    q / gg
}

/// Trace of the Hessian.
pub fn laplacian(f: &dyn ScalarField, x: &[f64], fd_step: f64) -> f64 {
    let d = x.len();
    let h = f.hessian(x).unwrap_or_else(|| hessian_fd(f, x, fd_step));
    (0..d).map(|a| h[a * d + a]).sum()
}

/// `Δ₂f + 2⟨∇log μ, ∇f⟩ + (p − 2)Δ∞f` at `x` (just `Δ∞f` for `p = ∞`).
pub fn el_residual(f: &dyn ScalarField, density: &DensityModel, p: Exponent, x: &[f64], fd_step: f64) -> Result<f64> {
    if x.len() != f.dim() || x.len() != density.dim() {
        return Err(Error::Dimension { expected: f.dim(), got: x.len() });
    }
    let g = grad_or_fd(f, x, fd_step);
    let h = f.hessian(x).unwrap_or_else(|| hessian_fd(f, x, fd_step));
    let d = x.len();
    let inf = quotient(&g, &h, 1.0);
    let Exponent::Finite(p) = p else { return Ok(inf) };
    let gl = density.grad_log(x)?;
    let lap: f64 = (0..d).map(|a| h[a * d + a]).sum();
    let drift: f64 = gl.iter().zip(&g).map(|(a, b)| a * b).sum();
    Ok(lap + 2.0 * drift + (p as f64 - 2.0) * inf)
}

/// `C_p = d^{−p/2} ω_{d−1} ∫₀^∞ r^{p+d−1} φ(r)^p dr`.
pub fn c_p(kernel: EdgeKernel, p: u32, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(invalid("d", "dimension must be positive"));
    }
    let e = simpson(
        |r| r.powi((p as usize + d - 1) as i32) * kernel.phi(r).powi(p as i32),
        0.0,
        kernel.support(),
        1e-10,
    )?;
    Ok((d as f64).powf(-(p as f64) / 2.0) * sphere_area(d) * e.value)
}

/// `∫ ‖∇f‖^p μ²` over the density's (effective) support.
pub fn i_p(f: &dyn ScalarField, density: &DensityModel, p: u32, quad: &QuadratureSpec) -> Result<Estimate> {
    quad.validate()?;
    let d = density.dim();
    if f.dim() != d {
        return Err(Error::Dimension { expected: d, got: f.dim() });
    }
    let (lo, hi) = density.effective_box();
    let diam = lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
    let step = 1e-5 * diam;
    let integrand = |x: &[f64]| {
        let g = grad_or_fd(f, x, step);
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mu = density.density_unchecked(x);
        gn.powi(p as i32) * mu * mu
    };
    let cuts = || {
        let mut c = vec![lo[0], hi[0]];
        c.extend(density.breakpoints().iter().chain(f.breakpoints().iter()).filter(|t| **t > lo[0] && **t < hi[0]));
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    };
    match *quad {
        QuadratureSpec::Adaptive { tol } => {
            if d != 1 {
                return Err(invalid("quad", "adaptive quadrature is one-dimensional"));
            }
            // evaluate inside each piece so one-sided derivatives are used at kinks
            let cuts = cuts();
            let mut out = Estimate { value: 0.0, error: 0.0 };
            let pieces = (cuts.len() - 1) as f64;
            for w in cuts.windows(2) {
                let pad = 1e-12 * (w[1] - w[0]);
                let e = simpson(|t| integrand(&[t.clamp(w[0] + pad, w[1] - pad)]), w[0], w[1], tol / pieces)?;
                out.value += e.value;
                out.error += e.error;
            }
            Ok(out)
        }
        QuadratureSpec::TensorGrid { points_per_axis } => {
            let run = |n: usize| -> f64 {
                if d == 1 {
                    cuts().windows(2).map(|w| gauss_on(n, w[0], w[1]).iter().map(|(t, wt)| wt * integrand(&[*t])).sum::<f64>()).sum()
                } else {
                    let rules: Vec<Vec<(f64, f64)>> = (0..d).map(|a| gauss_on(n, lo[a], hi[a])).collect();
                    tensor_sum(&rules, &integrand)
                }
            };
            let v = run(points_per_axis);
            let coarse = run((points_per_axis / 2).max(1));
            Ok(Estimate { value: v, error: (v - coarse).abs() })
        }
        QuadratureSpec::MonteCarlo { samples, seed } => {
            let mut r = rng::rng(seed);
            let vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
            let mut x = vec![0.0; d];
            let vals: Vec<f64> = (0..samples)
                .map(|_| {
                    for a in 0..d {
                        x[a] = lo[a] + (hi[a] - lo[a]) * rand::Rng::random::<f64>(&mut r);
                    }
                    integrand(&x)
                })
                .collect();
            let (m, se) = mean_stderr(&vals);
            Ok(Estimate { value: vol * m, error: vol * se })
        }
    }
}

fn tensor_sum(rules: &[Vec<(f64, f64)>], f: &dyn Fn(&[f64]) -> f64) -> f64 {
    let d = rules.len();
    let mut idx = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for a in 0..d {
            x[a] = rules[a][idx[a]].0;
            w *= rules[a][idx[a]].1;
        }
        total += w * f(&x);
        let mut a = 0;
        loop {
            idx[a] += 1;
            if idx[a] < rules[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
            if a == d {
                return total;
            }
        }
    }
}

/// Minimizer of `I_p` in 1D through the given labels.
///
/// Between consecutive labels `f = y_l + (y_r − y_l) Φ(x)/Φ(x_r)` with
/// `Φ(x) = ∫_{x_l}^x μ^{−2/(p−1)}`; linear for `p = ∞`, constant outside.
#[derive(Clone, Debug)]
pub struct ClosedForm1D {
    density: DensityModel,
    xs: Vec<f64>,
    ys: Vec<f64>,
    exponent: f64,
    spans: Vec<f64>,
}

pub fn closed_form_1d(density: &DensityModel, labels: &[(f64, f64)], p: Exponent) -> Result<ClosedForm1D> {
    if density.dim() != 1 {
        return Err(Error::Dimension { expected: 1, got: density.dim() });
    }
    if labels.len() < 2 {
        return Err(invalid("labels", "need at least two labels"));
    }
    if labels.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(invalid("labels", "x must be strictly ascending"));
    }
    let exponent = match p {
        Exponent::Finite(p) if p >= 2 => -2.0 / (p as f64 - 1.0),
        Exponent::Finite(p) => return Err(invalid("p", format!("{p} < 2"))),
        Exponent::Infinity => 0.0,
    };
    let xs: Vec<f64> = labels.iter().map(|l| l.0).collect();
    let ys: Vec<f64> = labels.iter().map(|l| l.1).collect();
    let mut cf = ClosedForm1D { density: density.clone(), xs, ys, exponent, spans: Vec::new() };
    // zero density anywhere on the hull is fatal
    let (a, b) = (cf.xs[0], *cf.xs.last().unwrap());
    let probe = density.breakpoints().iter().cloned().chain([a, b, 0.5 * (a + b)]);
    for t in probe.filter(|t| *t >= a && *t <= b) {
        if !(density.density_unchecked(&[t]) > 0.0) {
            return Err(invalid("density", format!("zero density at {t} inside the labeled hull")));
        }
    }
    cf.spans = cf.xs.windows(2).map(|w| cf.cumulative(w[0], w[1])).collect::<Result<_>>()?;
    Ok(cf)
}

impl ClosedForm1D {
    fn g(&self, t: f64) -> f64 {
        if self.exponent == 0.0 {
            1.0
        } else {
            self.density.density_unchecked(&[t]).powf(self.exponent)
        }
    }

    /// `∫_a^b μ^{−2/(p−1)}`.
    fn cumulative(&self, a: f64, b: f64) -> Result<f64> {
        match &self.density {
            DensityModel::PiecewiseConstant1D { breakpoints, values } => {
                let mut s = 0.0;
                for (c, v) in values.iter().enumerate() {
                    let (l, r) = (breakpoints[c].max(a), breakpoints[c + 1].min(b));
                    if r > l {
                        s += (r - l) * if self.exponent == 0.0 { 1.0 } else { v.powf(self.exponent) };
                    }
                }
                Ok(s)
            }
            DensityModel::Uniform { .. } => Ok((b - a) * self.g(0.5 * (a + b))),
            DensityModel::GaussianMixture { .. } => Ok(simpson(|t| self.g(t), a, b, 1e-13)?.value),
        }
    }

    fn interval(&self, x: f64) -> Option<usize> {
        if x < self.xs[0] || x >= *self.xs.last().unwrap() {
            return None;
        }
        Some(self.xs.partition_point(|t| *t <= x) - 1)
    }

    /// Ratio of slopes between two points (e.g. gap vs cluster).
    pub fn slope(&self, x: f64) -> f64 {
        match self.interval(x) {
            Some(k) => (self.ys[k + 1] - self.ys[k]) * self.g(x) / self.spans[k],
            None => 0.0,
        }
    }
}

impl ScalarField for ClosedForm1D {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &[f64]) -> f64 {
        let t = x[0];
        match self.interval(t) {
            Some(k) => {
                let phi = self.cumulative(self.xs[k], t).unwrap_or(f64::NAN);
                self.ys[k] + (self.ys[k + 1] - self.ys[k]) * phi / self.spans[k]
            }
            None if t < self.xs[0] => self.ys[0],
            None => *self.ys.last().unwrap(),
        }
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![self.slope(x[0])])
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.xs.iter().chain(self.density.breakpoints()).cloned().collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

/// Samples a 1D field on `n` evenly spaced points of `[a, b]`.
pub fn sample_field(f: &dyn ScalarField, a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let t = if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 };
            (t, f.value(&[t]))
        })
        .collect()
}
