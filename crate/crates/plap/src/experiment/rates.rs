//! `rates`: cross-validated RKHS and Lipschitz least squares on the
//! cluster model, at fixed `ε` and with `ε = 1/n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{config_err, fmt_list, logspace, spread, Check, Context, ExperimentParams};
use crate::density::make_cluster_instance;
use crate::error::Result;
use crate::estimators::{cross_validate, empirical_error, CvResult, Family, RegressionSample};
use crate::io::{fmt, Table};
use crate::plot::{PlotStyle, Series};
use crate::quad::mean_stderr;
use crate::rng;
use crate::spectrum::KernelK;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub epsilons: Vec<f64>,
    pub ns: Vec<usize>,
    /// Sample sizes of the `ε = 1/n` sweep.
    pub coupled_ns: Vec<usize>,
    pub sigma: f64,
    pub folds: usize,
    pub lambdas: Vec<f64>,
    /// Lipschitz grid; `null` means `2^0, ..., 2^16` plus `1/ε`.
    pub lipschitz: Option<Vec<f64>>,
    /// Overridden by the global replicate count.
    pub replicates: usize,
    /// Sample size of the fixed-`ε` comparisons.
    pub n_compare: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            epsilons: vec![0.1, 0.05, 0.01],
            ns: vec![32, 64, 128, 256, 512, 1024],
            coupled_ns: vec![64, 128, 256, 512, 1024],
            sigma: 0.05,
            folds: 5,
            lambdas: logspace(-9.0, 0.0, 10),
            lipschitz: None,
            replicates: 20,
            n_compare: 512,
        }
    }
}

impl ExperimentParams for Params {
    fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0 && *e < 0.5)) {
            return Err(config_err("params.epsilons", "need values in (0, 1/2)"));
        }
        if self.ns.iter().chain(&self.coupled_ns).any(|n| *n < 2 * self.folds.max(2)) {
            return Err(config_err("params.ns", format!("every n must be at least {}", 2 * self.folds.max(2))));
        }
        if self.coupled_ns.iter().any(|n| *n <= 2) {
            return Err(config_err("params.coupled_ns", "need n > 2 so that 1/n < 1/2"));
        }
        if !(self.sigma >= 0.0) {
            return Err(config_err("params.sigma", "must be nonnegative"));
        }
        if self.folds < 2 {
            return Err(config_err("params.folds", "need at least two folds"));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(config_err("params.lambdas", "need positive values"));
        }
        if let Some(l) = &self.lipschitz {
            if l.is_empty() || l.iter().any(|v| !(*v > 0.0)) {
                return Err(config_err("params.lipschitz", "need positive values"));
            }
        }
        if self.replicates == 0 {
            return Err(config_err("params.replicates", "must be positive"));
        }
        Ok(())
    }
}

impl Params {
    pub fn lipschitz_grid(&self, epsilon: f64) -> Vec<f64> {
        let mut g = self.lipschitz.clone().unwrap_or_else(|| {
            let mut g: Vec<f64> = (0..=16).map(|k| 2f64.powi(k)).collect();
            g.push(1.0 / epsilon);
            g
        });
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Fixed,
    Coupled,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Fixed => "fixed",
            Mode::Coupled => "coupled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub mode: Mode,
    pub n: usize,
    pub epsilon: f64,
}

/// One replicate of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub mse_rkhs: f64,
    pub mse_lipschitz: f64,
    pub cv_rkhs: CvResult,
    pub cv_lipschitz: CvResult,
}

pub fn cells(params: &Params) -> Vec<Cell> {
    let mut ns = params.ns.clone();
    if !ns.contains(&params.n_compare) {
        ns.push(params.n_compare);
        ns.sort_unstable();
    }
    let mut out = Vec::new();
    for &epsilon in &params.epsilons {
        for &n in &ns {
            out.push(Cell { mode: Mode::Fixed, n, epsilon });
        }
    }
    for &n in &params.coupled_ns {
        out.push(Cell { mode: Mode::Coupled, n, epsilon: 1.0 / n as f64 });
    }
    out
}

/// Draws a sample, cross-validates both estimators and scores the refits
/// on the design points.
pub fn trial(params: &Params, cell: Cell, seed: u64) -> Result<Trial> {
    let inst = make_cluster_instance(cell.epsilon)?;
    let sample = RegressionSample::draw(&inst, cell.n, params.sigma, seed)?;
    let fold_seed = rng::split(seed, 2);
    let rk = Family::Rkhs(KernelK::new(&inst.density)?);
    let cv_rkhs = cross_validate(&rk, &sample, &params.lambdas, params.folds, fold_seed)?;
    let mse_rkhs = empirical_error(&rk.fit(&sample, cv_rkhs.best_param)?, &inst.target, &sample.xs);
    let lip = Family::Lipschitz;
    let cv_lipschitz = cross_validate(&lip, &sample, &params.lipschitz_grid(cell.epsilon), params.folds, fold_seed)?;
    let mse_lipschitz = empirical_error(&lip.fit(&sample, cv_lipschitz.best_param)?, &inst.target, &sample.xs);
    Ok(Trial { mse_rkhs, mse_lipschitz, cv_rkhs, cv_lipschitz })
}

pub fn trial_seed(seed: u64, cell: usize, replicate: usize) -> u64 {
    rng::split(rng::split(seed, cell as u64), replicate as u64)
}

/// All trials, indexed `[cell][replicate]`.
pub fn compute(params: &Params, seed: u64, replicates: usize) -> Result<(Vec<Cell>, Vec<Vec<Trial>>)> {
    let cs = cells(params);
    let jobs: Vec<(usize, usize)> = (0..cs.len()).flat_map(|c| (0..replicates).map(move |r| (c, r))).collect();
    let flat: Vec<Trial> = jobs.par_iter().map(|&(c, r)| trial(params, cs[c], trial_seed(seed, c, r))).collect::<Result<_>>()?;
    let mut it = flat.into_iter();
    let grouped = cs.iter().map(|_| it.by_ref().take(replicates).collect()).collect();
    Ok((cs, grouped))
}

/// Mean MSE of both estimators per cell.
pub fn cell_means(trials: &[Vec<Trial>]) -> Vec<(f64, f64)> {
    trials
        .iter()
        .map(|ts| {
            let r: Vec<f64> = ts.iter().map(|t| t.mse_rkhs).collect();
            let l: Vec<f64> = ts.iter().map(|t| t.mse_lipschitz).collect();
            (mean_stderr(&r).0, mean_stderr(&l).0)
        })
        .collect()
}

pub(crate) fn run(params: &Params, ctx: &mut Context) -> Result<()> {
    let reps = ctx.replicates.unwrap_or(params.replicates);
    let seed = ctx.seed;
    let (cs, trials) = ctx.install(|| compute(params, seed, reps))?;
    let means = cell_means(&trials);

    let mut raw = Table::new(&["mode", "n", "epsilon", "replicate", "mse_rkhs", "mse_lipschitz", "lambda", "lipschitz"]);
    let mut summary = Table::new(&["mode", "n", "epsilon", "estimator", "mean_mse", "stderr", "mse_n23"]);
    for (c, ts) in cs.iter().zip(&trials) {
        for (r, t) in ts.iter().enumerate() {
            raw.push(vec![c.mode.name().into(), c.n.to_string(), fmt(c.epsilon), r.to_string(), fmt(t.mse_rkhs), fmt(t.mse_lipschitz), fmt(t.cv_rkhs.best_param), fmt(t.cv_lipschitz.best_param)]);
        }
        for (name, v) in [("rkhs", ts.iter().map(|t| t.mse_rkhs).collect::<Vec<_>>()), ("lipschitz", ts.iter().map(|t| t.mse_lipschitz).collect())] {
            let (m, se) = mean_stderr(&v);
            summary.push(vec![c.mode.name().into(), c.n.to_string(), fmt(c.epsilon), name.into(), fmt(m), fmt(se), fmt(m * (c.n as f64).powf(2.0 / 3.0))]);
        }
    }
    ctx.table("replicates.csv", &raw)?;
    ctx.table("mse.csv", &summary)?;

    let mut cv = Table::new(&["mode", "n", "epsilon", "estimator", "param", "cv_error"]);
    for (c, ts) in cs.iter().zip(&trials) {
        if c.mode == Mode::Fixed && c.n != params.n_compare {
            continue;
        }
        for (name, res) in [("rkhs", &ts[0].cv_rkhs), ("lipschitz", &ts[0].cv_lipschitz)] {
            for (p, e) in &res.cv_curve {
                cv.push(vec![c.mode.name().into(), c.n.to_string(), fmt(c.epsilon), name.into(), fmt(*p), fmt(*e)]);
            }
        }
    }
    ctx.table("cv_curves.csv", &cv)?;

    // fitted functions of the first replicate at the comparison size
    let mut fitted = Table::new(&["epsilon", "x", "target", "rkhs", "lipschitz"]);
    for (ci, c) in cs.iter().enumerate() {
        if c.mode != Mode::Fixed || c.n != params.n_compare {
            continue;
        }
        let inst = make_cluster_instance(c.epsilon)?;
        let sample = RegressionSample::draw(&inst, c.n, params.sigma, trial_seed(seed, ci, 0))?;
        let rk = Family::Rkhs(KernelK::new(&inst.density)?).fit(&sample, trials[ci][0].cv_rkhs.best_param)?;
        let lp = Family::Lipschitz.fit(&sample, trials[ci][0].cv_lipschitz.best_param)?;
        for k in 0..=200 {
            let x = -1.0 + 2.0 * k as f64 / 200.0;
            fitted.push_f64(&[c.epsilon, x, inst.target.eval(x), rk.predict(x), lp.predict(x)]);
        }
    }
    ctx.table("fitted.csv", &fitted)?;

    let mean_at = |mode: Mode, n: usize, eps: f64| -> (f64, f64) {
        let k = cs.iter().position(|c| c.mode == mode && c.n == n && (mode == Mode::Coupled || c.epsilon == eps)).expect("cell exists");
        means[k]
    };
    let at: Vec<(f64, f64)> = params.epsilons.iter().map(|&e| mean_at(Mode::Fixed, params.n_compare, e)).collect();
    let rk: Vec<f64> = at.iter().map(|m| m.0).collect();
    let sp = spread(&rk);
    ctx.check(Check::new(format!("n={}: CV-RKHS MSE varies < 2x across eps", params.n_compare), sp < 2.0, format!("{} spread {sp:.4}", fmt_list(&rk))));
    let (imax, imin) = arg_extremes(&params.epsilons);
    let lg = at[imin].1 / at[imax].1;
    ctx.check(Check::new(
        format!("n={}: CV-Lipschitz MSE grows >= 1.5x from eps={} to eps={}", params.n_compare, params.epsilons[imax], params.epsilons[imin]),
        lg >= 1.5,
        format!("ratio {lg:.4}"),
    ));
    if params.coupled_ns.len() >= 2 {
        let sc: Vec<(f64, f64)> = params.coupled_ns.iter().map(|&n| {
            let m = mean_at(Mode::Coupled, n, 0.0);
            let s = (n as f64).powf(2.0 / 3.0);
            (m.0 * s, m.1 * s)
        }).collect();
        let r: Vec<f64> = sc.iter().map(|v| v.0).collect();
        let l: Vec<f64> = sc.iter().map(|v| v.1).collect();
        let sp = spread(&r);
        ctx.check(Check::new("eps=1/n: RKHS MSE*n^(2/3) flat within 2x", sp <= 2.0, format!("{} spread {sp:.4}", fmt_list(&r))));
        let growth = l[l.len() - 1] / l[0];
        ctx.check(Check::new("eps=1/n: Lipschitz MSE*n^(2/3) grows >= 2x", growth >= 2.0, format!("{} growth {growth:.4}", fmt_list(&l))));
    }

    let mut series = Vec::new();
    for &e in &params.epsilons {
        for (name, pick) in [("RKHS", 0), ("Lipschitz", 1)] {
            let pts = cs.iter().zip(&means).filter(|(c, _)| c.mode == Mode::Fixed && c.epsilon == e).map(|(c, m)| (c.n as f64, if pick == 0 { m.0 } else { m.1 })).collect();
            series.push(Series::new(format!("{name}, eps = {e}"), pts));
        }
    }
    let style = PlotStyle { title: "MSE at fixed eps".into(), x_label: "n".into(), y_label: "MSE".into(), log_x: true, log_y: true, markers: true, ..PlotStyle::default() };
    ctx.plot("mse_fixed.svg", &series, &style)?;
    let coupled: Vec<(f64, (f64, f64))> = cs.iter().zip(&means).filter(|(c, _)| c.mode == Mode::Coupled).map(|(c, m)| (c.n as f64, *m)).collect();
    if !coupled.is_empty() {
        let s = |pick: usize| coupled.iter().map(|(n, m)| (*n, n.powf(2.0 / 3.0) * if pick == 0 { m.0 } else { m.1 })).collect();
        let style = PlotStyle { title: "eps = 1/n".into(), x_label: "n".into(), y_label: "MSE * n^(2/3)".into(), log_x: true, log_y: true, markers: true, ..PlotStyle::default() };
        ctx.plot("mse_coupled.svg", &[Series::new("RKHS", s(0)), Series::new("Lipschitz", s(1))], &style)?;
    }
    Ok(())
}

/// Indices of the largest and smallest entries.
fn arg_extremes(v: &[f64]) -> (usize, usize) {
    let mut hi = 0;
    let mut lo = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[hi] {
            hi = i;
        }
        if *x < v[lo] {
            lo = i;
        }
    }
    (hi, lo)
}
