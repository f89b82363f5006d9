//! CSV tables, JSON sidecars and checksums.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! table read back parses to the same bits and identical inputs give
//! identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::density::Points;
use crate::error::{invalid, Result};
use crate::estimators::CvResult;
use crate::graph::{EdgeKernel, GeometricGraph, WeightedGraph};
use crate::solve::SolveResult;
use crate::spectrum::{eigen_bound, RateReport, Spectrum};

/// A header plus rows of cells; every row has the header's width.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| fmt(*v)).collect());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header = r.headers()?.iter().map(String::from).collect();
        let rows = r.records().map(|rec| rec.map(|x| x.iter().map(String::from).collect())).collect::<std::result::Result<_, _>>()?;
        Ok(Table { header, rows })
    }

    /// Column `name` parsed as floats.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.header.iter().position(|h| h == name).ok_or_else(|| invalid("column", format!("no column `{name}`")))?;
        self.rows.iter().map(|r| r[c].parse::<f64>().map_err(|e| invalid("column", format!("`{name}`: {e}")))).collect()
    }
}

pub fn fmt(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

/// One row per point, columns `x0, x1, ...`.
pub fn write_points(points: &Points, path: &Path) -> Result<()> {
    let header: Vec<String> = (0..points.dim()).map(|k| format!("x{k}")).collect();
    let mut t = Table::new(&header);
    for r in points.rows() {
        t.push_f64(r);
    }
    t.write(path)
}

pub fn read_points(path: &Path) -> Result<Points> {
    let t = Table::read(path)?;
    let d = t.header.len();
    let mut data = Vec::with_capacity(d * t.rows.len());
    for k in 0..d {
        if t.header[k] != format!("x{k}") {
            return Err(invalid("points", format!("unexpected column `{}`", t.header[k])));
        }
    }
    for r in &t.rows {
        for v in r {
            data.push(v.parse::<f64>().map_err(|e| invalid("points", e.to_string()))?);
        }
    }
    Points::new(d, data)
}

/// Metadata written next to an edge list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphHeader {
    pub n: usize,
    pub d: usize,
    pub h: f64,
    pub kernel: EdgeKernel,
    pub edges: usize,
}

/// Edge list `i,j,w` at `path` and a JSON header at `path` with extension
/// `.json`.
pub fn write_graph(g: &GeometricGraph, path: &Path) -> Result<()> {
    write_edges(&g.graph, path)?;
    let header = GraphHeader { n: g.n(), d: g.dim(), h: g.h, kernel: g.kernel, edges: g.graph.edges().len() };
    fs::write(path.with_extension("json"), serde_json::to_string_pretty(&header)? + "\n")?;
    Ok(())
}

pub fn write_edges(g: &WeightedGraph, path: &Path) -> Result<()> {
    let mut t = Table::new(&["i", "j", "w"]);
    for e in g.edges() {
        t.push(vec![e.i.to_string(), e.j.to_string(), fmt(e.w)]);
    }
    t.write(path)
}

pub fn read_edges(n: usize, path: &Path) -> Result<WeightedGraph> {
    let t = Table::read(path)?;
    let parse = |s: &str| s.parse::<usize>().map_err(|e| invalid("edges", e.to_string()));
    let mut es = Vec::with_capacity(t.rows.len());
    for r in &t.rows {
        es.push((parse(&r[0])?, parse(&r[1])?, r[2].parse::<f64>().map_err(|e| invalid("edges", e.to_string()))?));
    }
    WeightedGraph::new(n, es)
}

/// `vertex,value`.
pub fn write_solution(f: &[f64], path: &Path) -> Result<()> {
    let mut t = Table::new(&["vertex", "value"]);
    for (i, v) in f.iter().enumerate() {
        t.push(vec![i.to_string(), fmt(*v)]);
    }
    t.write(path)
}

/// `iteration,objective`.
pub fn write_telemetry(res: &SolveResult, path: &Path) -> Result<()> {
    let mut t = Table::new(&["iteration", "objective"]);
    for (i, v) in res.trace.iter().enumerate() {
        t.push(vec![(i + 1).to_string(), fmt(*v)]);
    }
    t.write(path)
}

/// `k,j,x,gamma,bound`; `bound` is empty where the bound is undefined.
pub fn write_spectrum(s: &Spectrum, path: &Path) -> Result<()> {
    let mut t = Table::new(&["k", "j", "x", "gamma", "bound"]);
    for e in &s.values {
        let b = eigen_bound(s.epsilon, e.k, e.j).map(fmt).unwrap_or_default();
        t.push(vec![e.k.to_string(), e.j.to_string(), fmt(e.x), fmt(e.gamma), b]);
    }
    t.write(path)
}

/// `n,epsilon,delta_n,l2_rate,linf_rate`.
pub fn write_rates(rates: &[RateReport], path: &Path) -> Result<()> {
    let mut t = Table::new(&["n", "epsilon", "delta_n", "l2_rate", "linf_rate"]);
    for r in rates {
        t.push(vec![r.n.to_string(), fmt(r.epsilon), fmt(r.delta_n), fmt(r.l2_rate), fmt(r.linf_rate)]);
    }
    t.write(path)
}

/// `param,cv_error`.
pub fn write_cv_curve(cv: &CvResult, path: &Path) -> Result<()> {
    let mut t = Table::new(&["param", "cv_error"]);
    for (p, e) in &cv.cv_curve {
        t.push_f64(&[*p, *e]);
    }
    t.write(path)
}

/// `x,value` samples of a fitted or closed-form function.
pub fn write_xy(xy: &[(f64, f64)], path: &Path) -> Result<()> {
    let mut t = Table::new(&["x", "value"]);
    for (x, y) in xy {
        t.push_f64(&[*x, *y]);
    }
    t.write(path)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// Lowercase hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let digest = Sha256::digest(fs::read(path)?);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}
