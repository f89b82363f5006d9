//! Label interpolation on graphs: `p = 2`, even `p`, the lex-minimal
//! (`p = ∞`) interpolant, and the penalized least-squares variant.

mod lex;

pub use lex::solve_lex;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{check_even, WeightedGraph};
use crate::linalg::{solve_spd, SparseSym};

/// Observed vertices and their values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelSet {
    entries: Vec<(usize, f64)>,
}

impl LabelSet {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("labels", "label set is empty"));
        }
        let mut seen: Vec<usize> = entries.iter().map(|e| e.0).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("labels", "duplicate vertex"));
        }
        if entries.iter().any(|e| !e.1.is_finite()) {
            return Err(invalid("labels", "non-finite value"));
        }
        Ok(LabelSet { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn range(&self) -> (f64, f64) {
        let lo = self.entries.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        let hi = self.entries.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Per-vertex label, `None` where unlabeled.
    fn dense(&self, n: usize) -> Result<Vec<Option<f64>>> {
        let mut out = vec![None; n];
        for &(v, y) in &self.entries {
            if v >= n {
                return Err(Error::VertexRange { vertex: v, n });
            }
            out[v] = Some(y);
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
    /// Initial IRLS floor on `|f_i − f_j|`, relative to the label range.
    pub smoothing_floor: f64,
    pub linear_solver_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_iters: 500, rel_tol: 1e-9, smoothing_floor: 1e-8, linear_solver_tol: 1e-10 }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.rel_tol > 0.0 && self.smoothing_floor > 0.0 && self.linear_solver_tol > 0.0) {
            return Err(invalid("opts", "all solver options must be positive"));
        }
        Ok(())
    }
}

/// Final floor relative to the label range.
const FINAL_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub f: Vec<f64>,
    /// `J_p(f)`, or the maximum edge gradient for the lex solver.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `w_ij |f_i − f_j|` in edge order.
    pub gradients: Vec<f64>,
    /// Objective after each outer iteration.
    pub trace: Vec<f64>,
}

/// Errors if some component has no labeled vertex.
pub fn check_labeled_components(graph: &WeightedGraph, labels: &LabelSet) -> Result<()> {
    let comp = graph.components();
    let ncomp = comp.iter().max().map_or(0, |m| m + 1);
    let mut has = vec![false; ncomp];
    for &(v, _) in labels.entries() {
        if v >= graph.n() {
            return Err(Error::VertexRange { vertex: v, n: graph.n() });
        }
        has[comp[v]] = true;
    }
    if let Some(c) = has.iter().position(|h| !h) {
        let vertex = comp.iter().position(|x| *x == c).unwrap();
        let size = comp.iter().filter(|x| **x == c).count();
        return Err(Error::UnlabeledComponent { component: c, vertex, size });
    }
    Ok(())
}

/// Minimizes `Σ c_e (f_i − f_j)^2` with labeled vertices held fixed.
fn weighted_harmonic(graph: &WeightedGraph, fixed: &[Option<f64>], c: &[f64], warm: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = graph.n();
    let mut idx = vec![usize::MAX; n];
    let mut free = Vec::new();
    for v in 0..n {
        if fixed[v].is_none() {
            idx[v] = free.len();
            free.push(v);
        }
    }
    let mut f: Vec<f64> = (0..n).map(|v| fixed[v].unwrap_or(warm[v])).collect();
    if free.is_empty() {
        return Ok(f);
    }
    let m = free.len();
    let mut diag = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut off = Vec::new();
    for (e, ed) in graph.edges().iter().enumerate() {
        let (a, b) = (idx[ed.i], idx[ed.j]);
        match (a != usize::MAX, b != usize::MAX) {
            (true, true) => {
                diag[a] += c[e];
                diag[b] += c[e];
                off.push((a, b, -c[e]));
            }
            (true, false) => {
                diag[a] += c[e];
                rhs[a] += c[e] * f[ed.j];
            }
            (false, true) => {
                diag[b] += c[e];
                rhs[b] += c[e] * f[ed.i];
            }
            (false, false) => {}
        }
    }
    let a = SparseSym::new(diag, &off);
    let x0: Vec<f64> = free.iter().map(|&v| warm[v]).collect();
    let (x, _) = solve_spd(&a, &rhs, &x0, tol)?;
    for (k, &v) in free.iter().enumerate() {
        f[v] = x[k];
    }
    Ok(f)
}

fn finish(graph: &WeightedGraph, f: Vec<f64>, objective: f64, iterations: usize, converged: bool, trace: Vec<f64>) -> SolveResult {
    let gradients = graph.gradients(&f);
    SolveResult { f, objective, iterations, converged, gradients, trace }
}

/// Affine map of the labels onto `[0, 1]`; interpolation commutes with it.
struct Normalized {
    lo: f64,
    scale: f64,
    fixed: Vec<Option<f64>>,
}

impl Normalized {
    fn new(graph: &WeightedGraph, labels: &LabelSet) -> Result<Self> {
        let (lo, hi) = labels.range();
        let scale = if hi > lo { hi - lo } else { 1.0 };
        let fixed = labels.dense(graph.n())?.into_iter().map(|y| y.map(|y| (y - lo) / scale)).collect();
        Ok(Normalized { lo, scale, fixed })
    }

    fn restore(&self, g: &[f64], labels: &LabelSet) -> Vec<f64> {
        let mut f: Vec<f64> = g.iter().map(|v| self.lo + self.scale * v).collect();
        for &(v, y) in labels.entries() {
            f[v] = y;
        }
        f
    }
}

/// Harmonic interpolation: minimizes `Σ w_ij^2 (f_i − f_j)^2` subject to
/// the labels.
pub fn solve_p2(graph: &WeightedGraph, labels: &LabelSet, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate()?;
    check_labeled_components(graph, labels)?;
    let nz = Normalized::new(graph, labels)?;
    let c: Vec<f64> = graph.edges().iter().map(|e| e.w * e.w).collect();
    let g = weighted_harmonic(graph, &nz.fixed, &c, &vec![0.5; graph.n()], opts.linear_solver_tol)?;
    let f = nz.restore(&g, labels);
    let obj = graph.j_p(&f, 2)?;
    Ok(finish(graph, f, obj, 1, true, vec![obj]))
}

/// `J_p` and its first two derivatives along `f + t d`, plus an optional
/// squared loss on a subset of vertices.
struct Line<'a> {
    graph: &'a WeightedGraph,
    p: i32,
    wp: Vec<f64>,
    f: &'a [f64],
    d: &'a [f64],
    lambda: f64,
    loss: Option<&'a [Option<f64>]>,
}

impl Line<'_> {
    fn derivs(&self, t: f64) -> (f64, f64) {
        let p = self.p as f64;
        let (mut g, mut h) = (0.0, 0.0);
        for (e, ed) in self.graph.edges().iter().enumerate() {
            let dd = self.d[ed.i] - self.d[ed.j];
            if dd == 0.0 {
                continue;
            }
            let x = (self.f[ed.i] - self.f[ed.j]) + t * dd;
            let xp2 = x.powi(self.p - 2);
            g += self.wp[e] * xp2 * x * dd;
            h += self.wp[e] * xp2 * dd * dd;
        }
        g *= self.lambda * p;
        h *= self.lambda * p * (p - 1.0);
        if let Some(y) = self.loss {
            for (v, yv) in y.iter().enumerate() {
                if let Some(yv) = yv {
                    g += 2.0 * (self.f[v] + t * self.d[v] - yv) * self.d[v];
                    h += 2.0 * self.d[v] * self.d[v];
                }
            }
        }
        (g, h)
    }

    /// Exact minimizer over `t >= 0` of the convex restriction.
    fn minimize(&self) -> f64 {
        if self.derivs(0.0).0 >= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while self.derivs(hi).0 < 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e8 {
                return hi;
            }
        }
        let mut t = if lo == 0.0 { 1.0 } else { 0.5 * (lo + hi) };
        for _ in 0..200 {
            let (g, h) = self.derivs(t);
            if g == 0.0 {
                return t;
            }
            if g < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let newton = t - g / h;
            t = if h > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        t
    }
}

fn irls_weights(graph: &WeightedGraph, f: &[f64], p: u32, floor: f64) -> Vec<f64> {
    graph
        .edges()
        .iter()
        .map(|e| e.w.powi(p as i32) * (f[e.i] - f[e.j]).abs().max(floor).powi(p as i32 - 2))
        .collect()
}

/// Minimizes `J_p` subject to the labels by reweighted least squares with
/// an exact line search, so the objective never increases.
pub fn solve_even_p(graph: &WeightedGraph, labels: &LabelSet, p: u32, opts: &SolveOptions) -> Result<SolveResult> {
    check_even(p)?;
    if p == 2 {
        return solve_p2(graph, labels, opts);
    }
    opts.validate()?;
    check_labeled_components(graph, labels)?;
    let nz = Normalized::new(graph, labels)?;
    let c2: Vec<f64> = graph.edges().iter().map(|e| e.w * e.w).collect();
    let mut g = weighted_harmonic(graph, &nz.fixed, &c2, &vec![0.5; graph.n()], opts.linear_solver_tol)?;
    let wp: Vec<f64> = graph.edges().iter().map(|e| e.w.powi(p as i32)).collect();
    let mut obj = graph.j_p(&g, p)?;
    let mut trace = vec![obj * nz.scale.powi(p as i32)];
    let mut floor = opts.smoothing_floor;
    let mut converged = obj == 0.0;
    let mut it = 0;
    while !converged && it < opts.max_iters {
        it += 1;
        let c = irls_weights(graph, &g, p, floor);
        let target = weighted_harmonic(graph, &nz.fixed, &c, &g, opts.linear_solver_tol)?;
        let d: Vec<f64> = target.iter().zip(&g).map(|(a, b)| a - b).collect();
        let line = Line { graph, p: p as i32, wp: wp.clone(), f: &g, d: &d, lambda: 1.0, loss: None };
        let t = line.minimize();
        let next: Vec<f64> = g.iter().zip(&d).map(|(a, b)| a + t * b).collect();
        let new_obj = graph.j_p(&next, p)?;
        let improved = new_obj < obj;
        let rel = (obj - new_obj).abs() / obj.max(f64::MIN_POSITIVE);
        if improved {
            g = next;
            obj = new_obj;
        }
        trace.push(obj * nz.scale.powi(p as i32));
        if !improved || rel < opts.rel_tol {
            if floor > FINAL_FLOOR {
                floor = (floor * 0.1).max(FINAL_FLOOR);
            } else {
                converged = true;
            }
        }
    }
    let f = nz.restore(&g, labels);
    let objective = graph.j_p(&f, p)?;
    Ok(finish(graph, f, objective, it, converged, trace))
}

/// Minimizes `Σ_{i∈O} (f_i − y_i)^2 + λ J_p(f)` over all of `f`.
pub fn solve_penalized(graph: &WeightedGraph, labels: &LabelSet, p: u32, lambda: f64, opts: &SolveOptions) -> Result<SolveResult> {
    check_even(p)?;
    opts.validate()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("{lambda} must be positive")));
    }
    check_labeled_components(graph, labels)?;
    let n = graph.n();
    let y = labels.dense(n)?;
    let (lo, hi) = labels.range();
    let range = if hi > lo { hi - lo } else { 1.0 };
    let mean = labels.entries().iter().map(|e| e.1).sum::<f64>() / labels.len() as f64;

    // (I_O + λ (p/2) L_c) f = I_O y
    let system = |c: &[f64], warm: &[f64]| -> Result<Vec<f64>> {
        let s = lambda * p as f64 / 2.0;
        let mut diag: Vec<f64> = y.iter().map(|v| if v.is_some() { 1.0 } else { 0.0 }).collect();
        let mut off = Vec::with_capacity(graph.edges().len());
        for (e, ed) in graph.edges().iter().enumerate() {
            diag[ed.i] += s * c[e];
            diag[ed.j] += s * c[e];
            off.push((ed.i, ed.j, -s * c[e]));
        }
        let rhs: Vec<f64> = y.iter().map(|v| v.unwrap_or(0.0)).collect();
        Ok(solve_spd(&SparseSym::new(diag, &off), &rhs, warm, opts.linear_solver_tol)?.0)
    };
    let objective = |f: &[f64]| -> Result<f64> {
        let loss: f64 = y.iter().zip(f).filter_map(|(y, f)| y.map(|y| (f - y) * (f - y))).sum();
        Ok(loss + lambda * graph.j_p(f, p)?)
    };

    let c2: Vec<f64> = graph.edges().iter().map(|e| e.w * e.w).collect();
    let mut f = system(&c2, &vec![mean; n])?;
    let mut obj = objective(&f)?;
    let mut trace = vec![obj];
    if p == 2 {
        return Ok(finish(graph, f, obj, 1, true, trace));
    }
    let wp: Vec<f64> = graph.edges().iter().map(|e| e.w.powi(p as i32)).collect();
    let mut floor = opts.smoothing_floor * range;
    let final_floor = FINAL_FLOOR * range;
    let mut converged = obj == 0.0;
    let mut it = 0;
    while !converged && it < opts.max_iters {
        it += 1;
        let c = irls_weights(graph, &f, p, floor);
        let target = system(&c, &f)?;
        let d: Vec<f64> = target.iter().zip(&f).map(|(a, b)| a - b).collect();
        let line = Line { graph, p: p as i32, wp: wp.clone(), f: &f, d: &d, lambda, loss: Some(&y) };
        let t = line.minimize();
        let next: Vec<f64> = f.iter().zip(&d).map(|(a, b)| a + t * b).collect();
        let new_obj = objective(&next)?;
        let improved = new_obj < obj;
        let rel = (obj - new_obj).abs() / obj.max(f64::MIN_POSITIVE);
        if improved {
            f = next;
            obj = new_obj;
        }
        trace.push(obj);
        if !improved || rel < opts.rel_tol {
            if floor > final_floor {
                floor = (floor * 0.1).max(final_floor);
            } else {
                converged = true;
            }
        }
    }
    Ok(finish(graph, f, obj, it, converged, trace))
}
