//! RKHS-ball and Lipschitz-ball least squares for the cluster model, with
//! k-fold cross-validation.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::density::{ClusterInstance, TargetFunction};
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::spectrum::KernelK;

/// Design points with noisy responses, sorted by `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionSample {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub sigma: f64,
    pub seed: u64,
}

impl RegressionSample {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, sigma: f64, seed: u64) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Dimension { expected: xs.len(), got: ys.len() });
        }
        if xs.len() < 2 {
            return Err(invalid("sample", "need at least two points"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(invalid("sample", "non-finite value"));
        }
        let mut pairs: Vec<(f64, f64)> = xs.into_iter().zip(ys).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let (xs, ys) = pairs.into_iter().unzip();
        Ok(RegressionSample { xs, ys, sigma, seed })
    }

    /// `y_i = f*(x_i) + σ ξ_i` with `x_i ~ μ`, `ξ_i ~ N(0, 1)`.
    pub fn draw(instance: &ClusterInstance, n: usize, sigma: f64, seed: u64) -> Result<Self> {
        let pts = instance.density.sample(n, rng::split(seed, 0));
        let mut r = rng::stream(rng::split(seed, 1), 0);
        let xs: Vec<f64> = pts.as_slice().to_vec();
        let ys = xs
            .iter()
            .map(|x| {
                let z: f64 = StandardNormal.sample(&mut r);
                instance.target.eval(*x) + sigma * z
            })
            .collect();
        RegressionSample::new(xs, ys, sigma, seed)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn subset(&self, idx: &[usize]) -> Result<Self> {
        RegressionSample::new(idx.iter().map(|&i| self.xs[i]).collect(), idx.iter().map(|&i| self.ys[i]).collect(), self.sigma, self.seed)
    }
}

#[derive(Clone, Debug)]
pub enum FittedModel {
    Rkhs {
        xs: Vec<f64>,
        alpha: Vec<f64>,
        lambda: f64,
        kernel: KernelK,
        /// `αᵀ G α`.
        seminorm: f64,
    },
    Lipschitz { xs: Vec<f64>, values: Vec<f64>, l: f64 },
}

impl FittedModel {
    pub fn predict(&self, x: f64) -> f64 {
        match self {
            FittedModel::Rkhs { xs, alpha, kernel, .. } => {
                let xc = x.clamp(-1.0, 1.0);
                xs.iter().zip(alpha).map(|(xi, a)| a * kernel.k(xc, *xi).unwrap_or(0.0)).sum()
            }
            FittedModel::Lipschitz { xs, values, .. } => {
                if x <= xs[0] {
                    return values[0];
                }
                let n = xs.len();
                if x >= xs[n - 1] {
                    return values[n - 1];
                }
                let i = xs.partition_point(|t| *t <= x) - 1;
                let dx = xs[i + 1] - xs[i];
                if dx == 0.0 {
                    return values[i];
                }
                values[i] + (values[i + 1] - values[i]) * (x - xs[i]) / dx
            }
        }
    }

    pub fn predict_many(&self, xs: &[f64]) -> Vec<f64> {
        match self {
            FittedModel::Rkhs { xs: train, alpha, kernel, .. } => {
                let q: Vec<f64> = xs.iter().map(|x| x.clamp(-1.0, 1.0)).collect();
                let k = kernel.cross(&q, train).expect("clamped");
                (k * DVector::from_column_slice(alpha)).as_slice().to_vec()
            }
            _ => xs.iter().map(|x| self.predict(*x)).collect(),
        }
    }

    /// Odd part `(f(x) − f(−x))/2` of the fit.
    pub fn predict_odd(&self, x: f64) -> f64 {
        0.5 * (self.predict(x) - self.predict(-x))
    }
}

/// Kernel ridge regression: `(G + nλI) α = y`.
pub fn fit_rkhs(sample: &RegressionSample, lambda: f64, kernel: &KernelK) -> Result<FittedModel> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("{lambda} must be nonnegative")));
    }
    let n = sample.len();
    if lambda == 0.0 && sample.xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::SingularSystem);
    }
    let g = kernel.gram(&sample.xs)?;
    let mut a = g.clone();
    for i in 0..n {
        a[(i, i)] += n as f64 * lambda;
    }
    let y = DVector::from_column_slice(&sample.ys);
    let alpha = match a.clone().cholesky() {
        Some(ch) => ch.solve(&y),
        None => a.lu().solve(&y).ok_or(Error::SingularSystem)?,
    };
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let seminorm = alpha.dot(&(&g * &alpha));
    Ok(FittedModel::Rkhs { xs: sample.xs.clone(), alpha: alpha.as_slice().to_vec(), lambda, kernel: kernel.clone(), seminorm })
}

/// Exact least squares under `|f_{i+1} − f_i| <= c_i`.
///
/// Dynamic programming over the derivative of the value function, which is
/// piecewise linear; breakpoints left and right of the current minimizer
/// sit on two stacks with lazy shifts. Linear time up to stack moves.
pub fn project_bounded_differences(y: &[f64], c: &[f64]) -> Vec<f64> {
    let n = y.len();
    assert_eq!(c.len() + 1, n);
    let mut roots = vec![0.0; n];
    let mut left: Vec<(f64, f64)> = Vec::new();
    let mut right: Vec<(f64, f64)> = Vec::new();
    let (mut off_l, mut off_r) = (0.0, 0.0);
    let mut root = y[0];
    let mut slope = 1.0;
    roots[0] = root;
    for i in 1..n {
        let ci = c[i - 1];
        off_l -= ci;
        off_r += ci;
        left.push((root - ci - off_l, -slope));
        right.push((root + ci - off_r, slope));
        let mut g0 = root;
        let mut v = g0 - y[i];
        let mut s = 1.0;
        if v > 0.0 {
            while let Some(&(p, jump)) = left.last() {
                let pos = p + off_l;
                if g0 - v / s >= pos {
                    break;
                }
                v -= s * (g0 - pos);
                g0 = pos;
                left.pop();
                right.push((pos - off_r, jump));
                s -= jump;
            }
        } else if v < 0.0 {
            while let Some(&(p, jump)) = right.last() {
                let pos = p + off_r;
                if g0 - v / s <= pos {
                    break;
                }
                v += s * (pos - g0);
                g0 = pos;
                right.pop();
                left.push((pos - off_l, jump));
                s += jump;
            }
        }
        root = g0 - v / s;
        slope = s;
        roots[i] = root;
    }
    let mut f = roots.clone();
    for i in (0..n - 1).rev() {
        f[i] = roots[i].clamp(f[i + 1] - c[i], f[i + 1] + c[i]);
    }
    f
}

/// Least squares over `L`-Lipschitz functions on the sorted design.
pub fn fit_lipschitz(sample: &RegressionSample, l: f64) -> Result<FittedModel> {
    if !(l >= 0.0) {
        return Err(invalid("L", format!("{l} must be nonnegative")));
    }
    let c: Vec<f64> = sample.xs.windows(2).map(|w| if l.is_finite() { l * (w[1] - w[0]) } else { f64::INFINITY }).collect();
    let feasible = sample.ys.windows(2).zip(&c).all(|(w, ci)| (w[1] - w[0]).abs() <= *ci);
    let values = if feasible { sample.ys.clone() } else { project_bounded_differences(&sample.ys, &c) };
    Ok(FittedModel::Lipschitz { xs: sample.xs.clone(), values, l })
}

/// A one-parameter family of estimators.
#[derive(Clone, Debug)]
pub enum Family {
    /// Parameter is the ridge `λ`; larger is simpler.
    Rkhs(KernelK),
    /// Parameter is the Lipschitz bound `L`; smaller is simpler.
    Lipschitz,
}

impl Family {
    pub fn fit(&self, sample: &RegressionSample, param: f64) -> Result<FittedModel> {
        match self {
            Family::Rkhs(k) => fit_rkhs(sample, param, k),
            Family::Lipschitz => fit_lipschitz(sample, param),
        }
    }

    fn simpler(&self, a: f64, b: f64) -> bool {
        match self {
            Family::Rkhs(_) => a > b,
            Family::Lipschitz => a < b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_param: f64,
    /// `(param, mean squared held-out error)` per grid point.
    pub cv_curve: Vec<(f64, f64)>,
}

/// k-fold cross-validation; folds are drawn on the sorted sample, so the
/// input order does not matter.
pub fn cross_validate(family: &Family, sample: &RegressionSample, grid: &[f64], folds: usize, seed: u64) -> Result<CvResult> {
    if folds < 2 {
        return Err(invalid("folds", "need at least two folds"));
    }
    if grid.is_empty() {
        return Err(invalid("grid", "parameter grid is empty"));
    }
    let n = sample.len();
    if n < folds || n - n / folds < 2 {
        return Err(invalid("folds", format!("{n} points cannot fill {folds} folds")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::rng(seed));
    let mut sse = vec![0.0; grid.len()];
    for k in 0..folds {
        let test: Vec<usize> = perm.iter().enumerate().filter(|(i, _)| i % folds == k).map(|(_, &v)| v).collect();
        let mut train: Vec<usize> = perm.iter().enumerate().filter(|(i, _)| i % folds != k).map(|(_, &v)| v).collect();
        train.sort_unstable();
        let tr = sample.subset(&train)?;
        let tx: Vec<f64> = test.iter().map(|&i| sample.xs[i]).collect();
        for (g, &param) in grid.iter().enumerate() {
            let model = family.fit(&tr, param)?;
            let pred = model.predict_many(&tx);
            sse[g] += test.iter().zip(&pred).map(|(&i, p)| (p - sample.ys[i]).powi(2)).sum::<f64>();
        }
    }
    let cv_curve: Vec<(f64, f64)> = grid.iter().zip(&sse).map(|(p, s)| (*p, s / n as f64)).collect();
    let mut best = 0;
    for g in 1..grid.len() {
        let (e, eb) = (cv_curve[g].1, cv_curve[best].1);
        if e < eb || (e == eb && family.simpler(grid[g], grid[best])) {
            best = g;
        }
    }
    Ok(CvResult { best_param: grid[best], cv_curve })
}

/// `(1/n) Σ (f̂(x_i) − f*(x_i))²`.
pub fn empirical_error(model: &FittedModel, target: &TargetFunction, xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let pred = model.predict_many(xs);
    xs.iter().zip(&pred).map(|(x, p)| (p - target.eval(*x)).powi(2)).sum::<f64>() / xs.len() as f64
}
