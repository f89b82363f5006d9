//! `graph-demo`: interpolating two labels on a geometric graph for
//! `p = 2` and `p = ∞`, on a two-Gaussian mixture or any other density.

use serde::{Deserialize, Serialize};

use super::{config_err, Check, Context, ExperimentParams};
use crate::continuum::Exponent;
use crate::density::{DensityModel, Points};
use crate::error::Result;
use crate::graph::{build_graph, EdgeKernel, WeightedGraph};
use crate::io::{self, fmt, Table};
use crate::plot::{PlotStyle, Series};
use crate::rng;
use crate::solve::{solve_even_p, solve_lex, solve_p2, LabelSet, SolveOptions, SolveResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelPoint {
    pub at: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Sampled vertices, not counting the labeled ones.
    pub n: usize,
    pub density: DensityModel,
    pub h: f64,
    pub kernel: EdgeKernel,
    pub labels: Vec<LabelPoint>,
    pub ps: Vec<Exponent>,
    /// Also write the edge list.
    pub export_graph: bool,
    pub solver: SolveOptions,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n: 1000,
            density: DensityModel::two_gaussians_1d(0.0, 4.0, 1.0),
            h: 0.4,
            kernel: EdgeKernel::gaussian(),
            labels: vec![LabelPoint { at: vec![0.0], value: -1.0 }, LabelPoint { at: vec![4.0], value: 1.0 }],
            ps: vec![Exponent::Finite(2), Exponent::Infinity],
            export_graph: false,
            solver: SolveOptions::default(),
        }
    }
}

impl ExperimentParams for Params {
    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(config_err("params.n", "need at least two points"));
        }
        self.density.validate().map_err(|e| config_err("params.density", e.to_string()))?;
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(config_err("params.h", "must be positive"));
        }
        if self.labels.is_empty() {
            return Err(config_err("params.labels", "need at least one label"));
        }
        if let Some(l) = self.labels.iter().find(|l| l.at.len() != self.density.dim()) {
            return Err(config_err("params.labels", format!("label at {:?} does not match dimension {}", l.at, self.density.dim())));
        }
        if self.ps.is_empty() {
            return Err(config_err("params.ps", "empty"));
        }
        for p in &self.ps {
            if let Exponent::Finite(q) = p {
                if *q < 2 || q % 2 == 1 {
                    return Err(config_err("params.ps", format!("p = {q} must be even and >= 2, or \"inf\"")));
                }
            }
        }
        Ok(())
    }
}

/// Labeled points prepended to a sample, with components that hold no label
/// removed.
#[derive(Clone, Debug)]
pub struct LabeledGraph {
    pub points: Points,
    pub graph: WeightedGraph,
    /// Labeled vertices are `0..labels.len()`.
    pub labels: LabelSet,
    /// Sampled vertices dropped with unlabeled components.
    pub dropped: usize,
}

pub fn build_labeled(labels: &[LabelPoint], sample: &Points, kernel: EdgeKernel, h: f64) -> Result<LabeledGraph> {
    let d = sample.dim();
    let mut data: Vec<f64> = labels.iter().flat_map(|l| l.at.iter().cloned()).collect();
    data.extend_from_slice(sample.as_slice());
    let g = build_graph(Points::new(d, data)?, kernel, h)?;
    let comp = g.graph.components();
    let m = labels.len();
    let keep: Vec<usize> = (0..g.n()).filter(|&v| comp[..m].contains(&comp[v])).collect();
    let (graph, _) = g.graph.induced(&keep);
    let pts: Vec<f64> = keep.iter().flat_map(|&v| g.points.row(v).to_vec()).collect();
    let ls = LabelSet::new(labels.iter().enumerate().map(|(i, l)| (i, l.value)).collect())?;
    Ok(LabeledGraph { points: Points::new(d, pts)?, graph, labels: ls, dropped: g.n() - keep.len() })
}

pub fn solve_with(g: &WeightedGraph, labels: &LabelSet, p: Exponent, opts: &SolveOptions) -> Result<SolveResult> {
    match p {
        Exponent::Finite(2) => solve_p2(g, labels, opts),
        Exponent::Finite(q) => solve_even_p(g, labels, q, opts),
        Exponent::Infinity => solve_lex(g, labels),
    }
}

#[derive(Clone, Debug)]
pub struct DemoResult {
    pub labeled: LabeledGraph,
    pub solutions: Vec<(Exponent, SolveResult)>,
}

pub fn compute(params: &Params, seed: u64) -> Result<DemoResult> {
    let sample = params.density.sample(params.n, rng::split(seed, 0));
    let labeled = build_labeled(&params.labels, &sample, params.kernel, params.h)?;
    let solutions = params
        .ps
        .iter()
        .map(|&p| Ok((p, solve_with(&labeled.graph, &labeled.labels, p, &params.solver)?)))
        .collect::<Result<_>>()?;
    Ok(DemoResult { labeled, solutions })
}

/// Fraction of consecutive vertices (by first coordinate, between the two
/// outermost labels) where `f` moves against the label trend.
pub fn inversion_fraction(xs: &[f64], f: &[f64], labels: &LabelSet) -> f64 {
    let ent = labels.entries();
    let lo = ent.iter().min_by(|a, b| xs[a.0].total_cmp(&xs[b.0])).unwrap();
    let hi = ent.iter().max_by(|a, b| xs[a.0].total_cmp(&xs[b.0])).unwrap();
    let dir = (hi.1 - lo.1).signum();
    let mut idx: Vec<usize> = (0..xs.len()).filter(|&v| xs[v] >= xs[lo.0] && xs[v] <= xs[hi.0]).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
    let tol = 1e-9 * (hi.1 - lo.1).abs();
    let bad = idx.windows(2).filter(|w| dir * (f[w[1]] - f[w[0]]) < -tol).count();
    bad as f64 / (idx.len().max(2) - 1) as f64
}

pub fn checks(res: &DemoResult) -> Vec<Check> {
    let mut out = Vec::new();
    let find = |p: Exponent| res.solutions.iter().find(|s| s.0 == p).map(|s| &s.1);
    let (Some(f2), Some(finf)) = (find(Exponent::Finite(2)), find(Exponent::Infinity)) else {
        return out;
    };
    let g = &res.labeled.graph;
    let lab = &res.labeled.labels;
    if res.labeled.points.dim() == 1 && lab.len() == 2 {
        let frac = inversion_fraction(res.labeled.points.as_slice(), &finf.f, lab);
        out.push(Check::new("lex solution monotone between labels", frac <= 0.01, format!("inversion fraction {frac:.4}")));
    }
    let vg = g.vertex_gradients(&f2.f);
    let max2 = vg.iter().cloned().fold(0.0, f64::max);
    let at_label = lab.entries().iter().any(|&(v, _)| vg[v] == max2);
    out.push(Check::new("p=2 steepest vertex is labeled", at_label, format!("max vertex gradient {max2:.6}")));
    let maxinf = finf.objective;
    let ratio = max2 / maxinf;
    out.push(Check::new("p=2 max gradient >= 3x lex max gradient", ratio >= 3.0, format!("ratio {ratio:.4} ({max2:.6} vs {maxinf:.6})")));
    out
}

pub(crate) fn run(params: &Params, ctx: &mut Context) -> Result<()> {
    let res = compute(params, ctx.seed)?;
    let lg = &res.labeled;
    io::write_points(&lg.points, &ctx.path("points.csv"))?;
    ctx.record("points.csv");
    if params.export_graph {
        let mut t = Table::new(&["i", "j", "w"]);
        for e in lg.graph.edges() {
            t.push(vec![e.i.to_string(), e.j.to_string(), fmt(e.w)]);
        }
        ctx.table("edges.csv", &t)?;
        io::write_json(&serde_json::json!({ "n": lg.graph.n(), "d": lg.points.dim(), "h": params.h, "kernel": params.kernel, "edges": lg.graph.edges().len(), "dropped": lg.dropped }), &ctx.path("edges.json"))?;
        ctx.record("edges.json");
    }
    let mut summary = Table::new(&["p", "objective", "max_gradient", "iterations", "converged"]);
    for (p, s) in &res.solutions {
        let name = format!("solution_p{p}.csv");
        io::write_solution(&s.f, &ctx.path(&name))?;
        ctx.record(&name);
        let name = format!("telemetry_p{p}.csv");
        io::write_telemetry(s, &ctx.path(&name))?;
        ctx.record(&name);
        let maxg = s.gradients.iter().cloned().fold(0.0, f64::max);
        summary.push(vec![p.to_string(), fmt(s.objective), fmt(maxg), s.iterations.to_string(), s.converged.to_string()]);
    }
    ctx.table("summary.csv", &summary)?;
    if lg.points.dim() == 1 {
        let xs = lg.points.as_slice();
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
        let mut header = vec!["vertex".to_string(), "x".to_string()];
        header.extend(res.solutions.iter().map(|(p, _)| format!("f_p{p}")));
        let mut t = Table::new(&header);
        for &v in &order {
            let mut row = vec![v.to_string(), fmt(xs[v])];
            row.extend(res.solutions.iter().map(|(_, s)| fmt(s.f[v])));
            t.push(row);
        }
        ctx.table("curves.csv", &t)?;
        let series: Vec<Series> = res
            .solutions
            .iter()
            .map(|(p, s)| Series::new(format!("p = {p}"), order.iter().map(|&v| (xs[v], s.f[v])).collect()))
            .collect();
        let style = PlotStyle { title: "Interpolating solutions".into(), x_label: "x".into(), y_label: "f(x)".into(), ..PlotStyle::default() };
        ctx.plot("solutions.svg", &series, &style)?;
    }
    if lg.dropped > 0 {
        ctx.warn(format!("{} sampled vertices in components without labels were dropped", lg.dropped));
    }
    for c in checks(&res) {
        ctx.check(c);
    }
    Ok(())
}
