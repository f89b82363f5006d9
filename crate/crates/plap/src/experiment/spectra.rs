//! `spectrum`: eigenvalues of the cluster kernel against their bounds, and
//! the critical radius across `n` and `ε`.

use serde::{Deserialize, Serialize};

use super::{config_err, fmt_list, spread, Check, Context, ExperimentParams};
use crate::error::Result;
use crate::io::{self, fmt, Table};
use crate::plot::{PlotStyle, Series};
use crate::spectrum::{eigen_bound, eigenvalues, rate_bounds_with, EigenSource, EigenSum, RateReport, Spectrum};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub epsilons: Vec<f64>,
    pub j_max: usize,
    /// `ε` at which the first root is reported.
    pub small_epsilon: f64,
    pub x0_range: (f64, f64),
    pub max_residual: f64,
    pub ns: Vec<usize>,
    pub radius_epsilons: Vec<f64>,
    pub sigma: f64,
    /// `n` at which the `ε` dependence is checked.
    pub n_compare: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            epsilons: vec![0.04, 0.01],
            j_max: 3,
            small_epsilon: 1e-4,
            x0_range: (0.892, 0.899),
            max_residual: 1e-8,
            ns: vec![100, 1000, 10000],
            radius_epsilons: vec![0.04, 0.01, 0.0025],
            sigma: 1.0,
            n_compare: 1000,
        }
    }
}

impl ExperimentParams for Params {
    fn validate(&self) -> Result<()> {
        let eps_ok = |v: &[f64]| !v.is_empty() && v.iter().all(|e| *e > 0.0 && *e < 0.5);
        if !eps_ok(&self.epsilons) {
            return Err(config_err("params.epsilons", "need values in (0, 1/2)"));
        }
        if !eps_ok(&self.radius_epsilons) {
            return Err(config_err("params.radius_epsilons", "need values in (0, 1/2)"));
        }
        if !(self.small_epsilon > 0.0 && self.small_epsilon < 0.5) {
            return Err(config_err("params.small_epsilon", "must lie in (0, 1/2)"));
        }
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(config_err("params.ns", "need positive sample sizes"));
        }
        if !(self.sigma > 0.0) {
            return Err(config_err("params.sigma", "must be positive"));
        }
        Ok(())
    }
}

/// Bound violations and the worst root residual of one spectrum.
pub fn audit(s: &Spectrum) -> (usize, f64) {
    let mut bad = 0;
    let mut res = 0.0f64;
    for e in &s.values {
        if let Ok(b) = eigen_bound(s.epsilon, e.k, e.j) {
            if e.gamma > b {
                bad += 1;
            }
        }
        res = res.max(s.residual(e.x).abs());
    }
    (bad, res)
}

/// Critical radii on the `n × ε` grid from the bound sequences.
pub fn radius_grid(ns: &[usize], epsilons: &[f64], sigma: f64) -> Result<Vec<RateReport>> {
    let mut out = Vec::new();
    for &e in epsilons {
        let sum = EigenSum::new(&EigenSource::Lemma3Bounds { epsilon: e })?;
        for &n in ns {
            out.push(rate_bounds_with(&sum, n, sigma, e)?);
        }
    }
    Ok(out)
}

pub(crate) fn run(params: &Params, ctx: &mut Context) -> Result<()> {
    let mut series = Vec::new();
    for &e in &params.epsilons {
        let s = eigenvalues(e, params.j_max)?;
        let name = format!("spectrum_eps{e}.csv");
        io::write_spectrum(&s, &ctx.path(&name))?;
        ctx.record(&name);
        let (bad, res) = audit(&s);
        ctx.check(Check::new(format!("eps={e}: eigenvalues under bounds"), bad == 0, format!("{bad} of {} above bound", s.values.len())));
        ctx.check(Check::new(format!("eps={e}: root residuals <= {:e}", params.max_residual), res <= params.max_residual, format!("max residual {res:.3e}")));
        let g00 = s.gamma(0, 0).unwrap_or(f64::NAN);
        ctx.check(Check::new(format!("eps={e}: gamma_00 <= 1.26"), g00 <= 1.26, format!("gamma_00 {g00:.6}")));
        if let Some(w) = &s.warning {
            ctx.warn(format!("eps={e}: {w}"));
        }
        let mut sorted: Vec<f64> = s.values.iter().map(|v| v.gamma).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        series.push(Series::new(format!("eps = {e}"), sorted.iter().enumerate().map(|(i, g)| ((i + 1) as f64, *g)).collect()));
    }
    let style = PlotStyle { title: "Kernel eigenvalues".into(), x_label: "index".into(), y_label: "gamma".into(), log_x: true, log_y: true, markers: true, ..PlotStyle::default() };
    ctx.plot("spectrum.svg", &series, &style)?;

    let small = eigenvalues(params.small_epsilon, 0)?;
    let x0 = small.roots.first().copied().unwrap_or(f64::NAN);
    let mut t = Table::new(&["epsilon", "x0", "gamma00", "k0", "period_ratio"]);
    t.push(vec![fmt(params.small_epsilon), fmt(x0), fmt(1.0 / (x0 * x0)), small.k0.to_string(), fmt(small.period_ratio)]);
    ctx.table("first_root.csv", &t)?;
    let (lo, hi) = params.x0_range;
    ctx.check(Check::new(format!("eps={}: x0 in [{lo}, {hi}]", params.small_epsilon), (lo..=hi).contains(&x0), format!("x0 {x0:.6}")));

    let grid = radius_grid(&params.ns, &params.radius_epsilons, params.sigma)?;
    io::write_rates(&grid, &ctx.path("critical_radius.csv"))?;
    ctx.record("critical_radius.csv");
    let scaled = |r: &RateReport| r.delta_n * r.delta_n * (r.n as f64).powf(2.0 / 3.0);
    let mut series = Vec::new();
    for &e in &params.radius_epsilons {
        let v: Vec<f64> = grid.iter().filter(|r| r.epsilon == e).map(scaled).collect();
        let sp = spread(&v);
        ctx.check(Check::new(format!("eps={e}: delta_n^2 n^(2/3) within factor 2 over n"), sp <= 2.0, format!("{} spread {sp:.4}", fmt_list(&v))));
        series.push(Series::new(format!("eps = {e}"), grid.iter().filter(|r| r.epsilon == e).map(|r| (r.n as f64, scaled(r))).collect()));
    }
    let at: Vec<f64> = params
        .radius_epsilons
        .iter()
        .map(|&e| {
            let sum = EigenSum::new(&EigenSource::Lemma3Bounds { epsilon: e })?;
            Ok(scaled(&rate_bounds_with(&sum, params.n_compare, params.sigma, e)?))
        })
        .collect::<Result<_>>()?;
    let sp = spread(&at);
    ctx.check(Check::new(format!("n={}: delta_n^2 n^(2/3) varies < 1.5x across eps", params.n_compare), sp < 1.5, format!("{} spread {sp:.4}", fmt_list(&at))));
    let style = PlotStyle { title: "Critical radius".into(), x_label: "n".into(), y_label: "delta_n^2 n^(2/3)".into(), log_x: true, log_y: true, markers: true, ..PlotStyle::default() };
    ctx.plot("critical_radius.svg", &series, &style)?;
    Ok(())
}
