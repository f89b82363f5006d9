//! Probability densities used to draw vertices and to weight the limit
//! functional, including the two-level cluster density.

use rand::Rng as _;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng;

/// `n` points in `R^d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Points {
    d: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 || !data.len().is_multiple_of(d) {
            return Err(invalid("points", format!("{} values is not a multiple of d = {d}", data.len())));
        }
        Ok(Points { d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::Dimension { expected: d, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Points::new(d, data)
    }

    /// 1D points.
    pub fn line(xs: &[f64]) -> Self {
        Points { d: 1, data: xs.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        dist(self.row(i), self.row(j))
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum DensityModel {
    /// Uniform on the box `[lo, hi]`.
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
    /// `values[c]` on `[breakpoints[c], breakpoints[c+1])`; the support is
    /// `[breakpoints[0], breakpoints[last]]`.
    PiecewiseConstant1D { breakpoints: Vec<f64>, values: Vec<f64> },
    /// Isotropic Gaussian components on all of `R^d`.
    GaussianMixture {
        means: Vec<Vec<f64>>,
        stddevs: Vec<f64>,
        weights: Vec<f64>,
    },
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

impl DensityModel {
    pub fn uniform_unit(d: usize) -> Self {
        DensityModel::Uniform { lo: vec![0.0; d], hi: vec![1.0; d] }
    }

    /// Two-component mixture with equal weights, as in the graph demo.
    pub fn two_gaussians_1d(m0: f64, m1: f64, sd: f64) -> Self {
        DensityModel::GaussianMixture {
            means: vec![vec![m0], vec![m1]],
            stddevs: vec![sd, sd],
            weights: vec![0.5, 0.5],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DensityModel::Uniform { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(invalid("box", "lo and hi must be nonempty and of equal length"));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return Err(invalid("box", "need lo < hi on every axis"));
                }
            }
            DensityModel::PiecewiseConstant1D { breakpoints, values } => {
                if values.is_empty() || breakpoints.len() != values.len() + 1 {
                    return Err(invalid("breakpoints", "need len(values) + 1 breakpoints"));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(invalid("breakpoints", "must be strictly ascending"));
                }
                if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return Err(invalid("values", "must be positive and finite"));
                }
                let mass: f64 = values.iter().zip(breakpoints.windows(2)).map(|(v, w)| v * (w[1] - w[0])).sum();
                if (mass - 1.0).abs() > 1e-9 {
                    return Err(invalid("values", format!("total mass {mass} != 1")));
                }
            }
            DensityModel::GaussianMixture { means, stddevs, weights } => {
                let k = means.len();
                if k == 0 || stddevs.len() != k || weights.len() != k {
                    return Err(invalid("mixture", "means, stddevs and weights must have equal nonzero length"));
                }
                let d = means[0].len();
                if d == 0 || means.iter().any(|m| m.len() != d) {
                    return Err(invalid("means", "all means need the same nonzero dimension"));
                }
                if stddevs.iter().any(|s| !(*s > 0.0)) {
                    return Err(invalid("stddevs", "must be positive"));
                }
                if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(invalid("weights", "must lie on the simplex"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            DensityModel::Uniform { lo, .. } => lo.len(),
            DensityModel::PiecewiseConstant1D { .. } => 1,
            DensityModel::GaussianMixture { means, .. } => means[0].len(),
        }
    }

    /// Bounding box of the support; `None` for mixtures.
    pub fn support(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            DensityModel::Uniform { lo, hi } => Some((lo.clone(), hi.clone())),
            DensityModel::PiecewiseConstant1D { breakpoints, .. } => {
                Some((vec![breakpoints[0]], vec![*breakpoints.last().unwrap()]))
            }
            DensityModel::GaussianMixture { .. } => None,
        }
    }

    /// Support box, or a box holding all but a negligible tail of a mixture.
    pub fn effective_box(&self) -> (Vec<f64>, Vec<f64>) {
        if let Some(b) = self.support() {
            return b;
        }
        let DensityModel::GaussianMixture { means, stddevs, .. } = self else { unreachable!() };
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for (m, s) in means.iter().zip(stddevs) {
            for a in 0..d {
                lo[a] = lo[a].min(m[a] - 9.0 * s);
                hi[a] = hi[a].max(m[a] + 9.0 * s);
            }
        }
        (lo, hi)
    }

    /// Centroid of the support (mixture: weighted mean of the means).
    pub fn centroid(&self) -> Vec<f64> {
        match self {
            DensityModel::GaussianMixture { means, weights, .. } => {
                let mut c = vec![0.0; self.dim()];
                for (m, w) in means.iter().zip(weights) {
                    for (ci, mi) in c.iter_mut().zip(m) {
                        *ci += w * mi;
                    }
                }
                c
            }
            _ => {
                let (lo, hi) = self.support().unwrap();
                lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect()
            }
        }
    }

    /// Interior breakpoints of a 1D piecewise density (empty otherwise).
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            DensityModel::PiecewiseConstant1D { breakpoints, .. } => &breakpoints[1..breakpoints.len() - 1],
            _ => &[],
        }
    }

    /// Upper bound on the density (exact except for overlapping mixtures).
    pub fn max_density(&self) -> f64 {
        match self {
            DensityModel::Uniform { lo, hi } => 1.0 / volume(lo, hi),
            DensityModel::PiecewiseConstant1D { values, .. } => values.iter().cloned().fold(0.0, f64::max),
            DensityModel::GaussianMixture { stddevs, weights, .. } => {
                let d = self.dim() as f64;
                stddevs
                    .iter()
                    .zip(weights)
                    .map(|(s, w)| w * (-d * (LN_SQRT_2PI + s.ln())).exp())
                    .sum()
            }
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// `mu(x)`; zero outside the support of boxed variants.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.density_unchecked(x))
    }

    pub(crate) fn density_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            DensityModel::Uniform { lo, hi } => {
                if x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l <= *v && *v <= *h) {
                    1.0 / volume(lo, hi)
                } else {
                    0.0
                }
            }
            DensityModel::PiecewiseConstant1D { breakpoints, values } => match cell(breakpoints, x[0]) {
                Some(c) => values[c],
                None => 0.0,
            },
            DensityModel::GaussianMixture { means, stddevs, weights } => {
                let d = x.len() as f64;
                means
                    .iter()
                    .zip(stddevs)
                    .zip(weights)
                    .map(|((m, s), w)| {
                        let r2: f64 = x.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum();
                        w * (-0.5 * r2 / (s * s) - d * (LN_SQRT_2PI + s.ln())).exp()
                    })
                    .sum()
            }
        }
    }

    /// Analytic gradient of `log mu`.
    ///
    /// Zero inside piecewise-constant cells and for uniform boxes; an error
    /// at breakpoints and wherever the density vanishes.
    pub fn grad_log(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        match self {
            DensityModel::Uniform { lo, hi } => {
                let inside = x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| *l < *v && *v < *h);
                if !inside {
                    return Err(Error::Singular { x: x.to_vec(), reason: "outside the open support" });
                }
                Ok(vec![0.0; x.len()])
            }
            DensityModel::PiecewiseConstant1D { breakpoints, .. } => {
                let t = x[0];
                if t <= breakpoints[0] || t >= *breakpoints.last().unwrap() {
                    return Err(Error::Singular { x: x.to_vec(), reason: "outside the open support" });
                }
                if breakpoints.contains(&t) {
                    return Err(Error::Singular { x: x.to_vec(), reason: "on a breakpoint" });
                }
                Ok(vec![0.0])
            }
            DensityModel::GaussianMixture { means, stddevs, weights } => {
                // weighted average of the component scores, computed in log space
                let d = x.len() as f64;
                let logs: Vec<f64> = means
                    .iter()
                    .zip(stddevs)
                    .zip(weights)
                    .map(|((m, s), w)| {
                        let r2: f64 = x.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum();
                        w.ln() - 0.5 * r2 / (s * s) - d * s.ln()
                    })
                    .collect();
                let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if !top.is_finite() {
                    return Err(Error::Singular { x: x.to_vec(), reason: "zero density" });
                }
                let mut g = vec![0.0; x.len()];
                let mut z = 0.0;
                for (k, l) in logs.iter().enumerate() {
                    let r = (l - top).exp();
                    z += r;
                    let s2 = stddevs[k] * stddevs[k];
                    for (a, ga) in g.iter_mut().enumerate() {
                        *ga += r * (means[k][a] - x[a]) / s2;
                    }
                }
                g.iter_mut().for_each(|v| *v /= z);
                Ok(g)
            }
        }
    }

    /// `n` i.i.d. draws; identical for identical seeds.
    pub fn sample(&self, n: usize, seed: u64) -> Points {
        let mut r = rng::rng(seed);
        let d = self.dim();
        let mut data = Vec::with_capacity(n * d);
        match self {
            DensityModel::Uniform { lo, hi } => {
                for _ in 0..n {
                    for a in 0..d {
                        data.push(lo[a] + (hi[a] - lo[a]) * r.random::<f64>());
                    }
                }
            }
            DensityModel::PiecewiseConstant1D { breakpoints, values } => {
                let mut cdf = vec![0.0];
                for (c, v) in values.iter().enumerate() {
                    cdf.push(cdf[c] + v * (breakpoints[c + 1] - breakpoints[c]));
                }
                let total = *cdf.last().unwrap();
                for _ in 0..n {
                    let u = r.random::<f64>() * total;
                    let c = cdf.partition_point(|m| *m <= u).clamp(1, values.len()) - 1;
                    let t = breakpoints[c] + (u - cdf[c]) / values[c];
                    data.push(t.min(breakpoints[c + 1]));
                }
            }
            DensityModel::GaussianMixture { means, stddevs, weights } => {
                let pick = WeightedIndex::new(weights).expect("validated weights");
                for _ in 0..n {
                    let k = pick.sample(&mut r);
                    for a in 0..d {
                        let z: f64 = StandardNormal.sample(&mut r);
                        data.push(means[k][a] + stddevs[k] * z);
                    }
                }
            }
        }
        Points { d, data }
    }
}

fn volume(lo: &[f64], hi: &[f64]) -> f64 {
    lo.iter().zip(hi).map(|(l, h)| h - l).product()
}

fn cell(breakpoints: &[f64], t: f64) -> Option<usize> {
    let last = breakpoints.len() - 1;
    if t < breakpoints[0] || t > breakpoints[last] {
        return None;
    }
    Some(breakpoints.partition_point(|b| *b <= t).clamp(1, last) - 1)
}

/// Piecewise-linear function of one variable, constant outside its knots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetFunction {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl TargetFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(invalid("knots", "need one value per knot"));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("knots", "must be strictly ascending"));
        }
        Ok(TargetFunction { knots, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (k, v) = (&self.knots, &self.values);
        if x <= k[0] {
            return v[0];
        }
        if x >= k[k.len() - 1] {
            return v[v.len() - 1];
        }
        let i = k.partition_point(|t| *t <= x) - 1;
        v[i] + (v[i + 1] - v[i]) * (x - k[i]) / (k[i + 1] - k[i])
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0] || x >= k[k.len() - 1] {
            return 0.0;
        }
        let i = k.partition_point(|t| *t <= x) - 1;
        (self.values[i + 1] - self.values[i]) / (k[i + 1] - k[i])
    }

    pub fn lipschitz(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| ((v[1] - v[0]) / (k[1] - k[0])).abs())
            .fold(0.0, f64::max)
    }
}

/// Density and regression target tied together by the cluster assumption.
///
/// `mu = a` on `[-1, -eps) ∪ (eps, 1]` and `b = sqrt(eps)` on `[-eps, eps]`;
/// the target is `±1` on the clusters and linear across the gap.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterInstance {
    pub density: DensityModel,
    pub target: TargetFunction,
    pub epsilon: f64,
    pub a: f64,
    pub b: f64,
}

pub fn make_cluster_instance(epsilon: f64) -> Result<ClusterInstance> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid("epsilon", format!("{epsilon} not in (0, 1/2)")));
    }
    let b = epsilon.sqrt();
    let a = (0.5 - epsilon * b) / (1.0 - epsilon);
    let density = DensityModel::PiecewiseConstant1D {
        breakpoints: vec![-1.0, -epsilon, epsilon, 1.0],
        values: vec![a, b, a],
    };
    let target = TargetFunction::new(vec![-epsilon, epsilon], vec![-1.0, 1.0])?;
    Ok(ClusterInstance { density, target, epsilon, a, b })
}

impl ClusterInstance {
    /// `∫ (f*')^2 mu^2`, which is `2 b^2 / eps = 2`.
    pub fn target_energy(&self) -> f64 {
        let s = 1.0 / self.epsilon;
        s * s * self.b * self.b * 2.0 * self.epsilon
    }
}
