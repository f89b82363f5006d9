//! `degeneracy`: spike and log families that drive `I_p` to zero for
//! `p <= d`, and the contrast case `p > d`.

use serde::{Deserialize, Serialize};

use super::{config_err, fmt_list, spread, Check, Context, ExperimentParams};
use crate::continuum::{log_family, spike_integral, SpikeValue};
use crate::density::DensityModel;
use crate::error::Result;
use crate::io::{fmt, Table};
use crate::plot::{PlotStyle, Series};
use crate::quad::QuadratureSpec;

/// Relative slack on `value <= bound` for rounding in the quadrature.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpikeParams {
    pub p: u32,
    pub d: usize,
    pub epsilons: Vec<f64>,
    /// Allowed relative deviation of the halving ratio from `2^{p−d}`.
    pub tolerance: f64,
    /// Exponent of the contrast run; defaults to `d + 1`.
    pub contrast_p: Option<u32>,
}

impl Default for SpikeParams {
    fn default() -> Self {
        SpikeParams { p: 2, d: 3, epsilons: vec![0.1, 0.05, 0.025], tolerance: 0.2, contrast_p: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogParams {
    pub d: usize,
    pub epsilons: Vec<f64>,
    /// Allowed spread of `value · log((1+ε)/ε)`.
    pub factor: f64,
}

impl Default for LogParams {
    fn default() -> Self {
        LogParams { d: 2, epsilons: vec![1e-1, 1e-2, 1e-3, 1e-4], factor: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub spike: SpikeParams,
    pub log: LogParams,
    pub quadrature: QuadratureSpec,
}

impl Default for Params {
    fn default() -> Self {
        Params { spike: SpikeParams::default(), log: LogParams::default(), quadrature: QuadratureSpec::Adaptive { tol: 1e-10 } }
    }
}

fn check_eps(field: &str, eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(config_err(field, "need values in (0, 1)"));
    }
    Ok(())
}

impl ExperimentParams for Params {
    fn validate(&self) -> Result<()> {
        let s = &self.spike;
        if s.d == 0 || s.p == 0 || s.p as usize >= s.d {
            return Err(config_err("params.spike.p", format!("need 1 <= p < d, got p = {}, d = {}", s.p, s.d)));
        }
        check_eps("params.spike.epsilons", &s.epsilons)?;
        if let Some(q) = s.contrast_p {
            if (q as usize) <= s.d {
                return Err(config_err("params.spike.contrast_p", "must exceed d"));
            }
        }
        if self.log.d == 0 {
            return Err(config_err("params.log.d", "must be positive"));
        }
        check_eps("params.log.epsilons", &self.log.epsilons)?;
        self.quadrature.validate().map_err(|e| config_err("params.quadrature", e.to_string()))
    }
}

/// Uniform density on `[−1, 1]^d`, which contains every ball used here.
pub fn box_density(d: usize) -> DensityModel {
    DensityModel::Uniform { lo: vec![-1.0; d], hi: vec![1.0; d] }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyRun {
    pub family: &'static str,
    pub p: u32,
    pub d: usize,
    pub epsilons: Vec<f64>,
    pub values: Vec<SpikeValue>,
}

pub fn spike_run(p: u32, d: usize, epsilons: &[f64], quad: &QuadratureSpec) -> Result<FamilyRun> {
    let dens = box_density(d);
    let values = epsilons.iter().map(|&e| spike_integral(p, d, e, &dens, quad)).collect::<Result<_>>()?;
    Ok(FamilyRun { family: "spike", p, d, epsilons: epsilons.to_vec(), values })
}

pub fn log_run(d: usize, epsilons: &[f64], quad: &QuadratureSpec) -> Result<FamilyRun> {
    let dens = box_density(d);
    let values = epsilons.iter().map(|&e| log_family(d, e, &dens, quad)).collect::<Result<_>>()?;
    Ok(FamilyRun { family: "log", p: d as u32, d, epsilons: epsilons.to_vec(), values })
}

pub fn log_normalized(run: &FamilyRun) -> Vec<f64> {
    run.epsilons.iter().zip(&run.values).map(|(e, v)| v.value * ((1.0 + e) / e).ln()).collect()
}

/// `I(ε_{k+1}) / I(ε_k)` for consecutive `ε`.
pub fn halving_ratios(run: &FamilyRun) -> Vec<f64> {
    run.values.windows(2).map(|w| w[1].value / w[0].value).collect()
}

pub(crate) fn run(params: &Params, ctx: &mut Context) -> Result<()> {
    let q = &params.quadrature;
    let s = &params.spike;
    let cp = s.contrast_p.unwrap_or(s.d as u32 + 1);
    let spike = spike_run(s.p, s.d, &s.epsilons, q)?;
    let contrast = spike_run(cp, s.d, &s.epsilons, q)?;
    let log = log_run(params.log.d, &params.log.epsilons, q)?;

    let mut t = Table::new(&["family", "p", "d", "epsilon", "value", "error", "paper_bound", "normalized"]);
    let norm = log_normalized(&log);
    for (run, normed) in [(&spike, None), (&contrast, None), (&log, Some(&norm))] {
        for (k, (e, v)) in run.epsilons.iter().zip(&run.values).enumerate() {
            let nv = normed.map_or(String::new(), |n| fmt(n[k]));
            t.push(vec![run.family.into(), run.p.to_string(), run.d.to_string(), fmt(*e), fmt(v.value), fmt(v.error), fmt(v.paper_bound), nv]);
        }
    }
    ctx.table("degeneracy.csv", &t)?;

    let expect = 2f64.powi(s.p as i32 - s.d as i32);
    for (w, r) in spike.epsilons.windows(2).zip(halving_ratios(&spike)) {
        let scale = (w[1] / w[0]).powi(s.d as i32 - s.p as i32);
        let target = if (w[1] / w[0] - 0.5).abs() < 1e-12 { expect } else { scale };
        let ok = (r / target - 1.0).abs() <= s.tolerance;
        ctx.check(Check::new(format!("spike ratio I(eps={})/I(eps={}) near {target}", w[1], w[0]), ok, format!("ratio {r:.6}")));
    }
    let under = spike.values.iter().all(|v| v.value <= v.paper_bound * (1.0 + BOUND_SLACK));
    let vals: Vec<f64> = spike.values.iter().map(|v| v.value).collect();
    ctx.check(Check::new("spike value <= bound", under, format!("values {}", fmt_list(&vals))));
    let sp = spread(&norm);
    ctx.check(Check::new(
        format!("log family value*log((1+eps)/eps) within factor {}", params.log.factor),
        sp <= params.log.factor,
        format!("normalized {} spread {sp:.4}", fmt_list(&norm)),
    ));
    let cv: Vec<f64> = contrast.values.iter().map(|v| v.value).collect();
    let grows = cv.windows(2).all(|w| w[1] > w[0]);
    ctx.check(Check::new(format!("p={cp} spike grows as eps shrinks"), grows, format!("values {}", fmt_list(&cv))));

    let series = vec![
        Series::new(format!("spike p={}", s.p), spike.epsilons.iter().zip(&spike.values).map(|(e, v)| (*e, v.value)).collect()),
        Series::new(format!("spike p={cp}"), contrast.epsilons.iter().zip(&contrast.values).map(|(e, v)| (*e, v.value)).collect()),
        Series::new(format!("log d={}", params.log.d), log.epsilons.iter().zip(&log.values).map(|(e, v)| (*e, v.value)).collect()),
    ];
    let style = PlotStyle { title: "Degenerate families".into(), x_label: "epsilon".into(), y_label: "I_p".into(), log_x: true, log_y: true, markers: true, ..PlotStyle::default() };
    ctx.plot("degeneracy.svg", &series, &style)?;
    Ok(())
}
