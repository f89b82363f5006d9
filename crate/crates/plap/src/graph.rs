//! Kernel-weighted geometric graphs and the discrete objective `J_p`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::density::Points;
use crate::error::{invalid, Error, Result};

/// Default truncation radius (in units of `h`) of the Gaussian kernel.
pub const GAUSSIAN_CUTOFF: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum EdgeKernel {
    /// `1{z <= 1}`.
    Indicator,
    /// `exp(-z^2/2)` for `z <= z_cut`, else 0.
    Gaussian { z_cut: f64 },
}

impl EdgeKernel {
    pub fn gaussian() -> Self {
        EdgeKernel::Gaussian { z_cut: GAUSSIAN_CUTOFF }
    }

    pub fn phi(&self, z: f64) -> f64 {
        match *self {
            EdgeKernel::Indicator => (z <= 1.0) as u8 as f64,
            EdgeKernel::Gaussian { z_cut } => {
                if z <= z_cut {
                    (-0.5 * z * z).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius beyond which `phi` vanishes.
    pub fn support(&self) -> f64 {
        match *self {
            EdgeKernel::Indicator => 1.0,
            EdgeKernel::Gaussian { z_cut } => z_cut,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Undirected weighted graph with a CSR adjacency.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    nbrs: Vec<(usize, usize)>,
}

impl WeightedGraph {
    /// Builds from `(i, j, w)` triples; pairs are normalized to `i < j`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut es = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::VertexRange { vertex: a.max(b), n });
            }
            if a == b {
                return Err(invalid("edges", format!("self-loop at {a}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(invalid("edges", format!("weight {w} on ({a}, {b}) must be positive")));
            }
            es.push(Edge { i: a.min(b), j: a.max(b), w });
        }
        es.sort_by_key(|e| (e.i, e.j));
        if es.windows(2).any(|p| (p[0].i, p[0].j) == (p[1].i, p[1].j)) {
            return Err(invalid("edges", "duplicate pair"));
        }
        Ok(Self::from_sorted(n, es))
    }

    fn from_sorted(n: usize, edges: Vec<Edge>) -> Self {
        let mut deg = vec![0usize; n + 1];
        for e in &edges {
            deg[e.i + 1] += 1;
            deg[e.j + 1] += 1;
        }
        for v in 0..n {
            deg[v + 1] += deg[v];
        }
        let offsets = deg.clone();
        let mut fill = deg;
        let mut nbrs = vec![(0, 0); 2 * edges.len()];
        for (k, e) in edges.iter().enumerate() {
            nbrs[fill[e.i]] = (e.j, k);
            fill[e.i] += 1;
            nbrs[fill[e.j]] = (e.i, k);
            fill[e.j] += 1;
        }
        // neighbor lists ascending by vertex
        for v in 0..n {
            nbrs[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        WeightedGraph { n, edges, offsets, nbrs }
    }

    pub fn path(weights: &[f64]) -> Self {
        let es = weights.iter().enumerate().map(|(k, w)| (k, k + 1, *w));
        WeightedGraph::new(weights.len() + 1, es).expect("valid path")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `(neighbor, edge index)` pairs of `v`, ascending by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.nbrs[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.neighbors(v).iter().map(|&(_, e)| self.edges[e].w).sum()
    }

    /// Component id per vertex, numbered by smallest member.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &(u, _) in self.neighbors(v) {
                    if comp[u] == usize::MAX {
                        comp[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Subgraph induced by `keep` (ascending), with the old index of each new vertex.
    pub fn induced(&self, keep: &[usize]) -> (WeightedGraph, Vec<usize>) {
        let mut new_id = vec![usize::MAX; self.n];
        for (k, &v) in keep.iter().enumerate() {
            new_id[v] = k;
        }
        let es: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| new_id[e.i] != usize::MAX && new_id[e.j] != usize::MAX)
            .map(|e| {
                let (a, b) = (new_id[e.i], new_id[e.j]);
                Edge { i: a.min(b), j: a.max(b), w: e.w }
            })
            .collect();
        let mut es = es;
        es.sort_by_key(|e| (e.i, e.j));
        (WeightedGraph::from_sorted(keep.len(), es), keep.to_vec())
    }

    /// `Σ_{ij∈E} w_ij^p |f_i − f_j|^p` for even `p >= 2`.
    pub fn j_p(&self, f: &[f64], p: u32) -> Result<f64> {
        check_even(p)?;
        self.check_len(f)?;
        Ok(self.edges.iter().map(|e| (e.w * (f[e.i] - f[e.j])).abs().powi(p as i32)).sum())
    }

    /// `w_ij |f_i − f_j|` per edge, in edge order.
    pub fn gradients(&self, f: &[f64]) -> Vec<f64> {
        self.edges.iter().map(|e| e.w * (f[e.i] - f[e.j]).abs()).collect()
    }

    /// Largest incident edge gradient at each vertex.
    pub fn vertex_gradients(&self, f: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0f64; self.n];
        for e in &self.edges {
            let v = e.w * (f[e.i] - f[e.j]).abs();
            g[e.i] = g[e.i].max(v);
            g[e.j] = g[e.j].max(v);
        }
        g
    }

    pub(crate) fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: f.len() });
        }
        Ok(())
    }
}

pub(crate) fn check_even(p: u32) -> Result<()> {
    if p < 2 || p % 2 == 1 {
        return Err(Error::Exponent(p));
    }
    Ok(())
}

/// Random geometric graph `G_{N,h}`: points plus kernel weights
/// `w_ij = phi(|x_i − x_j| / h)` on every pair with positive weight.
#[derive(Clone, Debug)]
pub struct GeometricGraph {
    pub points: Points,
    pub kernel: EdgeKernel,
    pub h: f64,
    pub graph: WeightedGraph,
}

const BRUTE_FORCE_MAX: usize = 2000;

pub fn build_graph(points: Points, kernel: EdgeKernel, h: f64) -> Result<GeometricGraph> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid("h", format!("bandwidth {h} must be positive")));
    }
    if points.len() < 2 {
        return Err(invalid("points", "need at least two points"));
    }
    let reach = h * kernel.support();
    let mut edges = Vec::new();
    let push = |i: usize, j: usize, edges: &mut Vec<Edge>| {
        let w = kernel.phi(points.dist(i, j) / h);
        if w > 0.0 {
            edges.push(Edge { i, j, w });
        }
    };
    let n = points.len();
    if n <= BRUTE_FORCE_MAX {
        for i in 0..n {
            for j in i + 1..n {
                push(i, j, &mut edges);
            }
        }
    } else {
        let d = points.dim();
        let key = |x: &[f64]| x.iter().map(|v| (v / reach).floor() as i64).collect::<Vec<_>>();
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for i in 0..n {
            cells.entry(key(points.row(i))).or_default().push(i);
        }
        let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
            .map(|mut c| {
                (0..d)
                    .map(|_| {
                        let o = (c % 3) as i64 - 1;
                        c /= 3;
                        o
                    })
                    .collect()
            })
            .collect();
        for i in 0..n {
            let k = key(points.row(i));
            for off in &offsets {
                let nb: Vec<i64> = k.iter().zip(off).map(|(a, b)| a + b).collect();
                if let Some(list) = cells.get(&nb) {
                    for &j in list {
                        if j > i {
                            push(i, j, &mut edges);
                        }
                    }
                }
            }
        }
        edges.sort_by_key(|e| (e.i, e.j));
    }
    let graph = WeightedGraph::from_sorted(n, edges);
    Ok(GeometricGraph { points, kernel, h, graph })
}

impl GeometricGraph {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    /// `(1/(N h^d)) Σ_{j≠i} phi(|x_j − x_i| / h)`.
    pub fn scaled_degree(&self, i: usize) -> Result<f64> {
        if i >= self.n() {
            return Err(Error::VertexRange { vertex: i, n: self.n() });
        }
        Ok(self.graph.weighted_degree(i) / (self.n() as f64 * self.h.powi(self.dim() as i32)))
    }

    /// `J_p(f) / (N^2 h^{p+d})` with `J_p` summed over ordered pairs,
    /// the normalization under which it tends to `C_p · I_p(f)`.
    pub fn scaled_jp(&self, f: &[f64], p: u32) -> Result<f64> {
        let jp = self.graph.j_p(f, p)?;
        Ok(scale_jp(2.0 * jp, self.n(), self.h, p, self.dim()))
    }
}

/// `jp / (n^2 h^{p+d})`.
pub fn scale_jp(jp: f64, n: usize, h: f64, p: u32, d: usize) -> f64 {
    jp / ((n as f64).powi(2) * h.powi((p as usize + d) as i32))
}
