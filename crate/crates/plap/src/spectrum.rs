//! The RKHS kernel of the cluster model, its eigenvalues, and the critical
//! radius that sets the ℓ2 estimation rate.
//!
//! Eigenvalues are `γ = 1/x²` where `x` solves
//! `tan(εx/√b) · tan((1−ε)x/√a) = (b/a)^{3/2}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::density::{make_cluster_instance, DensityModel};
use crate::error::{invalid, Error, Result};
use crate::quad::simpson;

/// `K(x, y) = (1/4) ∫_{−1}^{1} μ^{−2} − (1/2) |∫_x^y μ^{−2}|` on `[−1, 1]`.
#[derive(Clone, Debug)]
pub struct KernelK {
    density: DensityModel,
    total: f64,
}

impl KernelK {
    pub fn new(density: &DensityModel) -> Result<Self> {
        if density.dim() != 1 {
            return Err(Error::Dimension { expected: 1, got: density.dim() });
        }
        if let Some((lo, hi)) = density.support() {
            if lo[0] > -1.0 || hi[0] < 1.0 {
                return Err(invalid("density", "support must cover [-1, 1]"));
            }
        }
        let mut k = KernelK { density: density.clone(), total: 0.0 };
        k.total = k.m(1.0);
        if !k.total.is_finite() {
            return Err(invalid("density", "1/mu^2 is not integrable on [-1, 1]"));
        }
        Ok(k)
    }

    /// `M(x) = ∫_{−1}^x μ^{−2}`.
    pub fn m(&self, x: f64) -> f64 {
        match &self.density {
            DensityModel::PiecewiseConstant1D { breakpoints, values } => {
                let mut s = 0.0;
                for (c, v) in values.iter().enumerate() {
                    let (l, r) = (breakpoints[c].max(-1.0), breakpoints[c + 1].min(x));
                    if r > l {
                        s += (r - l) / (v * v);
                    }
                }
                s
            }
            DensityModel::Uniform { lo, hi } => {
                let mu = 1.0 / (hi[0] - lo[0]);
                (x + 1.0) / (mu * mu)
            }
            DensityModel::GaussianMixture { .. } => simpson(
                |t| {
                    let m = self.density.density_unchecked(&[t]);
                    1.0 / (m * m)
                },
                -1.0,
                x,
                1e-12,
            )
            .map_or(f64::NAN, |e| e.value),
        }
    }

    pub fn k(&self, x: f64, y: f64) -> Result<f64> {
        for t in [x, y] {
            if !(-1.0..=1.0).contains(&t) {
                return Err(invalid("x", format!("{t} outside [-1, 1]")));
            }
        }
        Ok(self.k_of_m(self.m(x), self.m(y)))
    }

    fn k_of_m(&self, mx: f64, my: f64) -> f64 {
        0.25 * self.total - 0.5 * (my - mx).abs()
    }

    /// Gram matrix on points of `[−1, 1]`.
    pub fn gram(&self, xs: &[f64]) -> Result<DMatrix<f64>> {
        let ms: Vec<f64> = xs.iter().map(|x| self.k(*x, *x).map(|_| self.m(*x))).collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(xs.len(), xs.len(), |i, j| self.k_of_m(ms[i], ms[j])))
    }

    /// Cross kernel `K(a_i, b_j)`.
    pub fn cross(&self, a: &[f64], b: &[f64]) -> Result<DMatrix<f64>> {
        let ma: Vec<f64> = a.iter().map(|x| self.k(*x, *x).map(|_| self.m(*x))).collect::<Result<_>>()?;
        let mb: Vec<f64> = b.iter().map(|x| self.k(*x, *x).map(|_| self.m(*x))).collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| self.k_of_m(ma[i], mb[j])))
    }
}

pub fn kernel_k(density: &DensityModel, x: f64, y: f64) -> Result<f64> {
    KernelK::new(density)?.k(x, y)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub k: usize,
    pub j: usize,
    pub x: f64,
    pub gamma: f64,
}

/// Eigenvalues of the cluster kernel, indexed by period `j` and rank `k`
/// of the root within its period.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
    /// Rounded ratio of the two tangent periods.
    pub k0: usize,
    pub period_ratio: f64,
    /// Period `π√b/ε` of `tan(εx/√b)`.
    pub period: f64,
    /// Period `π√a/(1−ε)` of `tan((1−ε)x/√a)`.
    pub short_period: f64,
    /// Roots in the first period, ascending.
    pub roots: Vec<f64>,
    /// All eigenvalues up to `j_max`, ascending in `x`.
    pub values: Vec<Eigenvalue>,
    pub warning: Option<String>,
}

impl Spectrum {
    pub fn gamma(&self, k: usize, j: usize) -> Option<f64> {
        self.values.iter().find(|e| e.k == k && e.j == j).map(|e| e.gamma)
    }

    /// `tan(εx/√b) tan((1−ε)x/√a) − (b/a)^{3/2}`.
    pub fn residual(&self, x: f64) -> f64 {
        equation(self.epsilon, self.a, self.b, x)
    }
}

fn equation(eps: f64, a: f64, b: f64, x: f64) -> f64 {
    (eps * x / b.sqrt()).tan() * ((1.0 - eps) * x / a.sqrt()).tan() - (b / a).powf(1.5)
}

/// Enumerates every root in `[0, (j_max + 1) · period)`.
///
/// Zeros and poles of both tangents split the axis into pieces on which the
/// product is monotone, so each piece holds at most one root.
pub fn eigenvalues(epsilon: f64, j_max: usize) -> Result<Spectrum> {
    let ci = make_cluster_instance(epsilon)?;
    let (a, b) = (ci.a, ci.b);
    let period = std::f64::consts::PI * b.sqrt() / epsilon;
    let short_period = std::f64::consts::PI * a.sqrt() / (1.0 - epsilon);
    let ratio = period / short_period;
    let k0 = ratio.round() as usize;
    let warning = ((ratio - ratio.round()).abs() > 1e-3).then(|| format!("period ratio {ratio:.6} is not an integer; k0 rounded to {k0}"));
    let end = (j_max + 1) as f64 * period;
    let mut marks = vec![0.0, end];
    for p in [period, short_period] {
        let mut m = 1;
        loop {
            let t = 0.5 * p * m as f64;
            if t >= end {
                break;
            }
            marks.push(t);
            m += 1;
        }
    }
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    let f = |x: f64| equation(epsilon, a, b, x);
    let mut xs = Vec::new();
    for w in marks.windows(2) {
        let pad = 1e-12 * (w[1] - w[0]);
        let (mut lo, mut hi) = (w[0] + pad, w[1] - pad);
        let (flo, fhi) = (f(lo), f(hi));
        if !(flo.is_finite() && fhi.is_finite()) {
            return Err(Error::Bracket { lo, hi });
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        let up = flo < 0.0;
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (f(mid) < 0.0) == up {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        xs.push(if f(lo).abs() <= f(hi).abs() { lo } else { hi });
    }
    let mut values = Vec::with_capacity(xs.len());
    let mut k = 0;
    let mut cur_j = 0;
    for &x in &xs {
        let j = ((x / period).floor() as usize).min(j_max);
        if j != cur_j {
            cur_j = j;
            k = 0;
        }
        values.push(Eigenvalue { k, j, x, gamma: 1.0 / (x * x) });
        k += 1;
    }
    let roots = values.iter().filter(|e| e.j == 0).map(|e| e.x).collect();
    Ok(Spectrum { epsilon, a, b, k0, period_ratio: ratio, period, short_period, roots, values, warning })
}

/// `⌊√2 ε^{−3/4}⌋`, the period count of the eigenvalue bounds.
pub fn bound_k0(epsilon: f64) -> usize {
    (2f64.sqrt() * epsilon.powf(-0.75)).floor() as usize
}

/// `1.26` for `k = j = 0`, else `1 / ((k/(2√2) + j ε^{−3/4})² π²)`.
pub fn eigen_bound(epsilon: f64, k: usize, j: usize) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid("epsilon", format!("{epsilon} not in (0, 1/2)")));
    }
    let k0 = bound_k0(epsilon);
    if k >= 2 * k0 {
        return Err(invalid("k", format!("{k} > 2 k0 - 1 = {}", 2 * k0 - 1)));
    }
    Ok(bound_unchecked(epsilon, k, j))
}

fn bound_unchecked(epsilon: f64, k: usize, j: usize) -> f64 {
    if k == 0 && j == 0 {
        return 1.26;
    }
    let t = k as f64 / (2.0 * 2f64.sqrt()) + j as f64 * epsilon.powf(-0.75);
    1.0 / (t * t * std::f64::consts::PI * std::f64::consts::PI)
}

/// Terms below this are dropped from the eigenvalue sums.
pub const TRUNCATION: f64 = 1e-14;

/// Eigenvalue sequence entering the critical-radius inequality.
#[derive(Clone, Debug)]
pub enum EigenSource {
    Values(Vec<f64>),
    /// The bound sequence over `k < 2 k0`, `j >= 0`.
    Lemma3Bounds { epsilon: f64 },
}

/// Sorted eigenvalues with suffix sums, for fast `Σ min(γ, δ²)`.
#[derive(Clone, Debug)]
pub struct EigenSum {
    desc: Vec<f64>,
    suffix: Vec<f64>,
}

impl EigenSum {
    pub fn new(source: &EigenSource) -> Result<Self> {
        let mut v = match source {
            EigenSource::Values(v) => {
                if v.iter().any(|g| !(*g >= 0.0)) {
                    return Err(invalid("gamma", "eigenvalues must be nonnegative"));
                }
                v.clone()
            }
            EigenSource::Lemma3Bounds { epsilon } => {
                eigen_bound(*epsilon, 0, 0)?;
                let k0 = bound_k0(*epsilon);
                let mut v = Vec::new();
                for k in 0..2 * k0 {
                    for j in 0.. {
                        let g = bound_unchecked(*epsilon, k, j);
                        if g < TRUNCATION {
                            break;
                        }
                        v.push(g);
                    }
                }
                v
            }
        };
        v.sort_by(|a, b| b.total_cmp(a));
        let mut suffix = vec![0.0; v.len() + 1];
        for i in (0..v.len()).rev() {
            suffix[i] = suffix[i + 1] + v[i];
        }
        Ok(EigenSum { desc: v, suffix })
    }

    pub fn len(&self) -> usize {
        self.desc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.desc.is_empty()
    }

    /// `Σ min(γ, t)`.
    pub fn clipped(&self, t: f64) -> f64 {
        let m = self.desc.partition_point(|g| *g > t);
        m as f64 * t + self.suffix[m]
    }
}

const DELTA_LO: f64 = 1e-8;
const DELTA_HI: f64 = 10.0;

/// Smallest `δ` in `[1e-8, 10]` with `(2/n Σ min(γ, δ²))^{1/2} <= (R/σ) δ²`.
pub fn critical_radius(sum: &EigenSum, n: usize, sigma: f64, r: f64) -> Result<f64> {
    if n == 0 || !(sigma > 0.0) || !(r > 0.0) {
        return Err(invalid("n", "need n >= 1, sigma > 0, R > 0"));
    }
    let g = |d: f64| (r / sigma) * d * d - (2.0 / n as f64 * sum.clipped(d * d)).sqrt();
    if g(DELTA_LO) >= 0.0 {
        return Ok(DELTA_LO);
    }
    if g(DELTA_HI) < 0.0 {
        return Err(Error::Bracket { lo: DELTA_LO, hi: DELTA_HI });
    }
    let (mut lo, mut hi) = (DELTA_LO, DELTA_HI);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub n: usize,
    pub sigma: f64,
    pub epsilon: f64,
    pub delta_n: f64,
    /// `(σ²/n)^{2/3}`.
    pub l2_rate: f64,
    /// `(σ²/(ε n))^{2/3}`.
    pub linf_rate: f64,
}

/// Radius of the RKHS ball holding the cluster target.
pub const RKHS_RADIUS: f64 = 2.0;

pub fn rate_bounds(n: usize, sigma: f64, epsilon: f64) -> Result<RateReport> {
    let sum = EigenSum::new(&EigenSource::Lemma3Bounds { epsilon: epsilon.min(0.499_999) })?;
    rate_bounds_with(&sum, n, sigma, epsilon)
}

/// As [`rate_bounds`] with a precomputed bound sequence.
pub fn rate_bounds_with(sum: &EigenSum, n: usize, sigma: f64, epsilon: f64) -> Result<RateReport> {
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon", "must be positive"));
    }
    let delta_n = critical_radius(sum, n, sigma, RKHS_RADIUS)?;
    let s2 = sigma * sigma;
    Ok(RateReport {
        n,
        sigma,
        epsilon,
        delta_n,
        l2_rate: (s2 / n as f64).powf(2.0 / 3.0),
        linf_rate: (s2 / (epsilon * n as f64)).powf(2.0 / 3.0),
    })
}
