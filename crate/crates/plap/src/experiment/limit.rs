//! `limit-check`: the scaled graph energy against `C_p · I_p`, and graph
//! solutions against the 1D closed form on the cluster density.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::demo::{build_labeled, solve_with, LabelPoint};
use super::{config_err, fmt_list, Check, Context, ExperimentParams};
use crate::continuum::{c_p, closed_form_1d, i_p, tensor_contraction_check, Exponent, Linear, ScalarField, TensorCheck};
use crate::density::{make_cluster_instance, DensityModel};
use crate::error::Result;
use crate::graph::{build_graph, EdgeKernel};
use crate::io::{fmt, Table};
use crate::plot::{PlotStyle, Series};
use crate::quad::{mean_stderr, QuadratureSpec};
use crate::rng;
use crate::solve::SolveOptions;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    pub n: usize,
    pub h: f64,
    pub ps: Vec<u32>,
    pub kernel: EdgeKernel,
    pub density: DensityModel,
    /// Gradient of the linear test function.
    pub slope: Vec<f64>,
    /// Seeds; overridden by the global replicate count.
    pub replicates: usize,
    pub tolerance: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            n: 2000,
            h: 0.05,
            ps: vec![2, 4],
            kernel: EdgeKernel::Indicator,
            density: DensityModel::uniform_unit(1),
            slope: vec![1.0],
            replicates: 20,
            tolerance: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolutionParams {
    pub epsilon: f64,
    pub n: usize,
    /// One check per bandwidth.
    pub hs: Vec<f64>,
    pub p: u32,
    pub kernel: EdgeKernel,
    pub replicates: usize,
    pub tolerance: f64,
    pub solver: SolveOptions,
}

impl Default for SolutionParams {
    fn default() -> Self {
        SolutionParams {
            epsilon: 0.1,
            n: 5000,
            hs: vec![0.02, 0.01],
            p: 2,
            kernel: EdgeKernel::Indicator,
            replicates: 10,
            tolerance: 0.1,
            solver: SolveOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TensorParams {
    pub ps: Vec<u32>,
    pub ds: Vec<usize>,
    pub kernel: EdgeKernel,
    pub samples: usize,
    /// Allowed distance in standard errors.
    pub sigmas: f64,
}

impl Default for TensorParams {
    fn default() -> Self {
        TensorParams { ps: vec![2, 3, 4], ds: vec![2, 3], kernel: EdgeKernel::Indicator, samples: 1_000_000, sigmas: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub energy: EnergyParams,
    /// Skipped when `null`.
    pub solution: Option<SolutionParams>,
    /// Skipped when `null`.
    pub tensor: Option<TensorParams>,
}

impl Default for Params {
    fn default() -> Self {
        Params { energy: EnergyParams::default(), solution: Some(SolutionParams::default()), tensor: Some(TensorParams::default()) }
    }
}

impl ExperimentParams for Params {
    fn validate(&self) -> Result<()> {
        let e = &self.energy;
        if e.n < 2 {
            return Err(config_err("params.energy.n", "need at least two points"));
        }
        if !(e.h > 0.0) {
            return Err(config_err("params.energy.h", "must be positive"));
        }
        if e.ps.is_empty() || e.ps.iter().any(|p| *p < 2 || p % 2 == 1) {
            return Err(config_err("params.energy.ps", "need even exponents >= 2"));
        }
        e.density.validate().map_err(|err| config_err("params.energy.density", err.to_string()))?;
        if e.slope.len() != e.density.dim() {
            return Err(config_err("params.energy.slope", format!("length {} != dimension {}", e.slope.len(), e.density.dim())));
        }
        if e.replicates == 0 {
            return Err(config_err("params.energy.replicates", "must be at least 1"));
        }
        if let Some(s) = &self.solution {
            if !(s.epsilon > 0.0 && s.epsilon < 0.5) {
                return Err(config_err("params.solution.epsilon", "must lie in (0, 1/2)"));
            }
            if s.hs.is_empty() || s.hs.iter().any(|h| !(*h > 0.0)) {
                return Err(config_err("params.solution.hs", "need positive bandwidths"));
            }
            if s.p < 2 || s.p % 2 == 1 {
                return Err(config_err("params.solution.p", "must be even and >= 2"));
            }
            if s.n < 2 || s.replicates == 0 {
                return Err(config_err("params.solution", "n >= 2 and replicates >= 1 required"));
            }
        }
        if let Some(t) = &self.tensor {
            if t.ps.is_empty() || t.ds.is_empty() || t.ds.contains(&0) {
                return Err(config_err("params.tensor", "need exponents and positive dimensions"));
            }
            if t.samples < 2 {
                return Err(config_err("params.tensor.samples", "need at least two samples"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyResult {
    pub p: u32,
    /// `C_p · I_p(f)`.
    pub limit: f64,
    /// Scaled energy per seed.
    pub values: Vec<f64>,
}

impl EnergyResult {
    pub fn mean(&self) -> f64 {
        mean_stderr(&self.values).0
    }
}

fn quad_for(d: usize) -> QuadratureSpec {
    if d == 1 {
        QuadratureSpec::Adaptive { tol: 1e-10 }
    } else {
        QuadratureSpec::TensorGrid { points_per_axis: 48 }
    }
}

/// Scaled `J_p` of the linear field on one sample, per exponent.
pub fn energy_replicate(params: &EnergyParams, seed: u64) -> Result<Vec<f64>> {
    let f = Linear { c: params.slope.clone(), c0: 0.0 };
    let pts = params.density.sample(params.n, seed);
    let vals: Vec<f64> = pts.rows().map(|x| f.value(x)).collect();
    let g = build_graph(pts, params.kernel, params.h)?;
    params.ps.iter().map(|&p| g.scaled_jp(&vals, p)).collect()
}

/// Scaled energies over `replicates` seeds, run in parallel.
pub fn energy(params: &EnergyParams, seed: u64, replicates: usize) -> Result<Vec<EnergyResult>> {
    let d = params.density.dim();
    let f = Linear { c: params.slope.clone(), c0: 0.0 };
    let runs: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| energy_replicate(params, rng::split(seed, r as u64)))
        .collect::<Result<_>>()?;
    params
        .ps
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let limit = c_p(params.kernel, p, d)? * i_p(&f, &params.density, p, &quad_for(d))?.value;
            Ok(EnergyResult { p, limit, values: runs.iter().map(|r| r[k]).collect() })
        })
        .collect()
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Sup-distance between graph solutions and the closed form at the
/// vertices, with labels `(−1, −1)` and `(1, 1)`.
pub fn solution_distance(params: &SolutionParams, h: f64, seed: u64) -> Result<f64> {
    let inst = make_cluster_instance(params.epsilon)?;
    let labels = [LabelPoint { at: vec![-1.0], value: -1.0 }, LabelPoint { at: vec![1.0], value: 1.0 }];
    let sample = inst.density.sample(params.n, seed);
    let lg = build_labeled(&labels, &sample, params.kernel, h)?;
    let sol = solve_with(&lg.graph, &lg.labels, Exponent::Finite(params.p), &params.solver)?;
    let cf = closed_form_1d(&inst.density, &[(-1.0, -1.0), (1.0, 1.0)], Exponent::Finite(params.p))?;
    let xs = lg.points.as_slice();
    Ok(xs.iter().zip(&sol.f).map(|(x, f)| (f - cf.value(&[*x])).abs()).fold(0.0, f64::max))
}

pub(crate) fn run(params: &Params, ctx: &mut Context) -> Result<()> {
    let e = &params.energy;
    let reps = ctx.replicates.unwrap_or(e.replicates);
    let seed = ctx.seed;
    let res = ctx.install(|| energy(e, rng::split(seed, 0), reps))?;
    let mut t = Table::new(&["p", "replicate", "scaled_jp"]);
    for r in &res {
        for (k, v) in r.values.iter().enumerate() {
            t.push(vec![r.p.to_string(), k.to_string(), fmt(*v)]);
        }
    }
    ctx.table("energy_replicates.csv", &t)?;
    let mut s = Table::new(&["p", "mean", "stderr", "limit", "ratio"]);
    for r in &res {
        let (m, se) = mean_stderr(&r.values);
        s.push_f64(&[r.p as f64, m, se, r.limit, m / r.limit]);
        let ok = (m / r.limit - 1.0).abs() <= e.tolerance;
        ctx.check(Check::new(
            format!("scaled J_{} within {:.0}% of C_p I_p", r.p, e.tolerance * 100.0),
            ok,
            format!("mean {m:.6} vs limit {:.6}", r.limit),
        ));
    }
    ctx.table("energy.csv", &s)?;

    if let Some(sp) = &params.solution {
        let mut t = Table::new(&["h", "replicate", "sup_dist"]);
        let mut series = Vec::new();
        for (hk, &h) in sp.hs.iter().enumerate() {
            let d: Vec<f64> = ctx
                .par_map(sp.replicates, |r| solution_distance(sp, h, rng::split(rng::split(seed, 1), r as u64)))
                .into_iter()
                .collect::<Result<_>>()?;
            for (r, v) in d.iter().enumerate() {
                t.push(vec![fmt(h), r.to_string(), fmt(*v)]);
            }
            let med = median(&d);
            ctx.check(Check::new(
                format!("closed-form sup distance at h={h} <= {}", sp.tolerance),
                med <= sp.tolerance,
                format!("median {med:.4} over {} seeds {}", d.len(), fmt_list(&d)),
            ));
            if hk == 0 {
                // one seed's profile for plotting
                let inst = make_cluster_instance(sp.epsilon)?;
                let labels = [LabelPoint { at: vec![-1.0], value: -1.0 }, LabelPoint { at: vec![1.0], value: 1.0 }];
                let lg = build_labeled(&labels, &inst.density.sample(sp.n, rng::split(rng::split(seed, 1), 0)), sp.kernel, h)?;
                let sol = solve_with(&lg.graph, &lg.labels, Exponent::Finite(sp.p), &sp.solver)?;
                let cf = closed_form_1d(&inst.density, &[(-1.0, -1.0), (1.0, 1.0)], Exponent::Finite(sp.p))?;
                let xs = lg.points.as_slice();
                let mut order: Vec<usize> = (0..xs.len()).collect();
                order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
                let mut prof = Table::new(&["x", "graph", "closed_form"]);
                for &v in &order {
                    prof.push_f64(&[xs[v], sol.f[v], cf.value(&[xs[v]])]);
                }
                ctx.table("solution_profile.csv", &prof)?;
                series.push(Series::new("graph", order.iter().map(|&v| (xs[v], sol.f[v])).collect()));
                series.push(Series::new("closed form", order.iter().map(|&v| (xs[v], cf.value(&[xs[v]]))).collect()));
            }
        }
        ctx.table("solution_distance.csv", &t)?;
        let style = PlotStyle { title: format!("Graph vs continuum, h = {}", sp.hs[0]), y_label: "f".into(), ..PlotStyle::default() };
        ctx.plot("solution_profile.svg", &series, &style)?;
    }

    if let Some(tp) = &params.tensor {
        let cases: Vec<(u32, usize)> = tp.ps.iter().flat_map(|&p| tp.ds.iter().map(move |&d| (p, d))).collect();
        let kernel = tp.kernel;
        let res: Vec<TensorCheck> = ctx
            .par_map(cases.len(), |k| {
                let (p, d) = cases[k];
                let u: Vec<f64> = (0..d).map(|a| 1.0 / (a + 1) as f64).collect();
                tensor_contraction_check(&|r| kernel.phi(r), kernel.support(), p, d, &u, tp.samples, rng::split(rng::split(seed, 2), k as u64))
            })
            .into_iter()
            .collect::<Result<_>>()?;
        let mut t = Table::new(&["p", "d", "lhs", "stderr", "rhs", "rhs_isotropic", "z"]);
        for (&(p, d), r) in cases.iter().zip(&res) {
            let z = (r.lhs - r.rhs) / r.mc_stderr;
            t.push(vec![p.to_string(), d.to_string(), fmt(r.lhs), fmt(r.mc_stderr), fmt(r.rhs), fmt(r.rhs_isotropic), fmt(z)]);
            ctx.check(Check::new(
                format!("tensor identity p={p}, d={d} within {} standard errors", tp.sigmas),
                z.abs() <= tp.sigmas,
                format!("lhs {:.6e} rhs {:.6e} isotropic {:.6e} z {z:.2}", r.lhs, r.rhs, r.rhs_isotropic),
            ));
        }
        ctx.table("tensor.csv", &t)?;
    }
    Ok(())
}
