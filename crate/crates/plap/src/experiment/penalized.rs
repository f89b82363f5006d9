//! `penalized-check`: the penalized solution is also the constrained
//! solution through its own fitted labels.

use rand::seq::index::sample;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{config_err, Check, Context, ExperimentParams};
use crate::density::DensityModel;
use crate::error::Result;
use crate::graph::{build_graph, EdgeKernel, WeightedGraph};
use crate::io::{fmt, Table};
use crate::plot::{PlotStyle, Series};
use crate::rng;
use crate::solve::{solve_even_p, solve_penalized, LabelSet, SolveOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Graph count; overridden by the global replicate count.
    pub graphs: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub h: f64,
    pub label_fraction: f64,
    pub ps: Vec<u32>,
    pub lambdas: Vec<f64>,
    /// Allowed `|ΔJ_p| / max(1, J_p)`.
    pub tolerance: f64,
    pub solver: SolveOptions,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            graphs: 10,
            n_min: 20,
            n_max: 100,
            h: 0.15,
            label_fraction: 0.2,
            ps: vec![2, 4],
            lambdas: vec![0.1, 1.0, 10.0],
            tolerance: 1e-6,
            solver: SolveOptions { rel_tol: 1e-13, ..SolveOptions::default() },
        }
    }
}

impl ExperimentParams for Params {
    fn validate(&self) -> Result<()> {
        if self.graphs == 0 {
            return Err(config_err("params.graphs", "must be positive"));
        }
        if self.n_min < 2 || self.n_max < self.n_min {
            return Err(config_err("params.n_min", "need 2 <= n_min <= n_max"));
        }
        if !(self.h > 0.0) {
            return Err(config_err("params.h", "must be positive"));
        }
        if !(self.label_fraction > 0.0 && self.label_fraction <= 1.0) {
            return Err(config_err("params.label_fraction", "must lie in (0, 1]"));
        }
        if self.ps.is_empty() || self.ps.iter().any(|p| *p < 2 || p % 2 == 1) {
            return Err(config_err("params.ps", "need even exponents >= 2"));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(config_err("params.lambdas", "need positive values"));
        }
        Ok(())
    }
}

/// A random geometric graph in the unit square with random labels, at least
/// one per component.
pub fn random_instance(params: &Params, seed: u64) -> Result<(WeightedGraph, LabelSet)> {
    let mut r = rng::rng(seed);
    let n = r.random_range(params.n_min..=params.n_max);
    let pts = DensityModel::uniform_unit(2).sample(n, rng::split(seed, 1));
    let g = build_graph(pts, EdgeKernel::gaussian(), params.h)?.graph;
    let m = ((n as f64 * params.label_fraction).ceil() as usize).clamp(1, n);
    let mut chosen: Vec<usize> = sample(&mut r, n, m).into_vec();
    let comp = g.components();
    let mut covered: Vec<usize> = chosen.iter().map(|&v| comp[v]).collect();
    for v in 0..n {
        if !covered.contains(&comp[v]) {
            covered.push(comp[v]);
            chosen.push(v);
        }
    }
    chosen.sort_unstable();
    let labels = LabelSet::new(chosen.into_iter().map(|v| (v, r.random_range(-1.0..1.0))).collect())?;
    Ok((g, labels))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceRow {
    pub graph: usize,
    pub n: usize,
    pub p: u32,
    pub lambda: f64,
    pub jp_penalized: f64,
    pub jp_constrained: f64,
}

impl EquivalenceRow {
    pub fn discrepancy(&self) -> f64 {
        (self.jp_penalized - self.jp_constrained).abs() / self.jp_penalized.max(1.0)
    }
}

/// Penalized solve, then a constrained solve through the fitted labels.
pub fn equivalence(g: &WeightedGraph, labels: &LabelSet, p: u32, lambda: f64, opts: &SolveOptions) -> Result<(f64, f64)> {
    let pen = solve_penalized(g, labels, p, lambda, opts)?;
    let fitted = LabelSet::new(labels.entries().iter().map(|&(v, _)| (v, pen.f[v])).collect())?;
    let con = solve_even_p(g, &fitted, p, opts)?;
    Ok((g.j_p(&pen.f, p)?, con.objective))
}

pub fn compute(params: &Params, seed: u64, graphs: usize) -> Result<Vec<EquivalenceRow>> {
    let per: Vec<Vec<EquivalenceRow>> = (0..graphs)
        .into_par_iter()
        .map(|k| {
            let (g, labels) = random_instance(params, rng::split(seed, k as u64))?;
            let mut rows = Vec::new();
            for &p in &params.ps {
                for &lambda in &params.lambdas {
                    let (jp_penalized, jp_constrained) = equivalence(&g, &labels, p, lambda, &params.solver)?;
                    rows.push(EquivalenceRow { graph: k, n: g.n(), p, lambda, jp_penalized, jp_constrained });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

pub(crate) fn run(params: &Params, ctx: &mut Context) -> Result<()> {
    let graphs = ctx.replicates.unwrap_or(params.graphs);
    let seed = ctx.seed;
    let rows = ctx.install(|| compute(params, seed, graphs))?;
    let mut t = Table::new(&["graph", "n", "p", "lambda", "jp_penalized", "jp_constrained", "discrepancy"]);
    for r in &rows {
        t.push(vec![r.graph.to_string(), r.n.to_string(), r.p.to_string(), fmt(r.lambda), fmt(r.jp_penalized), fmt(r.jp_constrained), fmt(r.discrepancy())]);
    }
    ctx.table("equivalence.csv", &t)?;
    let series: Vec<Series> = params
        .ps
        .iter()
        .map(|&p| {
            let mut pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.p == p).map(|r| (r.jp_constrained, r.jp_penalized)).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            Series::new(format!("p = {p}"), pts)
        })
        .collect();
    let style = PlotStyle { title: "Penalized vs constrained".into(), x_label: "J_p constrained".into(), y_label: "J_p penalized".into(), markers: true, ..PlotStyle::default() };
    ctx.plot("equivalence.svg", &series, &style)?;
    for &p in &params.ps {
        let worst = rows.iter().filter(|r| r.p == p).map(|r| r.discrepancy()).fold(0.0, f64::max);
        ctx.check(Check::new(
            format!("p={p}: constrained re-solve matches penalized J_p within {:e}", params.tolerance),
            worst <= params.tolerance,
            format!("worst discrepancy {worst:.3e} over {graphs} graphs"),
        ));
    }
    Ok(())
}
