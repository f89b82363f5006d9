//! `amle-check`: `f(x) = ‖x‖` is infinity-harmonic away from the origin
//! but not harmonic.

use serde::{Deserialize, Serialize};

use super::{config_err, Check, Context, ExperimentParams};
use crate::continuum::{from_fn, infinity_laplacian, laplacian, RadialPower};
use crate::error::Result;
use crate::io::Table;
use crate::plot::{PlotStyle, Series};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub d: usize,
    pub points: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Finite-difference step of the derivative-free evaluation.
    pub fd_step: f64,
    pub inf_tol: f64,
    pub lap_tol: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { d: 3, points: 100, r_min: 0.5, r_max: 1.0, fd_step: 1e-4, inf_tol: 1e-6, lap_tol: 1e-4 }
    }
}

impl ExperimentParams for Params {
    fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(config_err("params.d", "need d >= 2"));
        }
        if self.points == 0 {
            return Err(config_err("params.points", "must be positive"));
        }
        if !(self.r_min > 0.0 && self.r_max >= self.r_min) {
            return Err(config_err("params.r_min", "need 0 < r_min <= r_max"));
        }
        if !(self.fd_step > 0.0) {
            return Err(config_err("params.fd_step", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmleRow {
    pub x: Vec<f64>,
    pub r: f64,
    pub inf_lap: f64,
    pub lap: f64,
    pub inf_lap_fd: f64,
    pub lap_fd: f64,
}

/// Uniform direction, radius uniform in `[r_min, r_max]`.
pub fn sample_shell(d: usize, n: usize, r_min: f64, r_max: f64, seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng as _;
    use rand_distr::{Distribution, StandardNormal};
    let mut g = rng::rng(seed);
    (0..n)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut g)).collect();
            let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let r = r_min + (r_max - r_min) * g.random::<f64>();
            v.iter().map(|a| a * r / nv).collect()
        })
        .collect()
}

pub fn compute(params: &Params, seed: u64) -> Vec<AmleRow> {
    let exact = RadialPower::norm(params.d);
    let blind = from_fn(params.d, |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt());
    sample_shell(params.d, params.points, params.r_min, params.r_max, seed)
        .into_iter()
        .map(|x| {
            let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            AmleRow {
                r,
                inf_lap: infinity_laplacian(&exact, &x, params.fd_step),
                lap: laplacian(&exact, &x, params.fd_step),
                inf_lap_fd: infinity_laplacian(&blind, &x, params.fd_step),
                lap_fd: laplacian(&blind, &x, params.fd_step),
                x,
            }
        })
        .collect()
}

pub(crate) fn run(params: &Params, ctx: &mut Context) -> Result<()> {
    let rows = compute(params, ctx.seed);
    let dm1 = params.d as f64 - 1.0;
    let mut header: Vec<String> = (0..params.d).map(|k| format!("x{k}")).collect();
    header.extend(["r", "inf_laplacian", "laplacian", "expected_laplacian", "inf_laplacian_fd", "laplacian_fd"].map(String::from));
    let mut t = Table::new(&header);
    for row in &rows {
        let mut v = row.x.clone();
        v.extend([row.r, row.inf_lap, row.lap, dm1 / row.r, row.inf_lap_fd, row.lap_fd]);
        t.push_f64(&v);
    }
    ctx.table("amle.csv", &t)?;
    for (label, inf, lap) in [("analytic", false, false), ("finite-difference", true, true)] {
        let wi = rows.iter().map(|r| if inf { r.inf_lap_fd } else { r.inf_lap }.abs()).fold(0.0, f64::max);
        let wl = rows.iter().map(|r| ((if lap { r.lap_fd } else { r.lap }) - dm1 / r.r).abs()).fold(0.0, f64::max);
        ctx.check(Check::new(format!("{label}: |inf-Laplacian| <= {:e}", params.inf_tol), wi <= params.inf_tol, format!("max {wi:.3e}")));
        ctx.check(Check::new(format!("{label}: Laplacian = (d-1)/r within {:e}", params.lap_tol), wl <= params.lap_tol, format!("max error {wl:.3e}")));
    }
    let mut pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.r, r.lap_fd)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let exact: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, dm1 / p.0)).collect();
    let style = PlotStyle { title: "Laplacian of |x|".into(), x_label: "r".into(), y_label: "Laplacian".into(), markers: true, ..PlotStyle::default() };
    ctx.plot("amle.svg", &[Series::new("finite difference", pts), Series::new("(d-1)/r", exact)], &style)?;
    Ok(())
}
