//! Lex-minimal interpolation by repeatedly fixing a steepest path.
//!
//! Edge length is `1/w`. A steepest path joins two terminals through free
//! vertices and maximizes `|y_u − y_v| / len`. For a trial slope `α`,
//! two multi-source Dijkstra sweeps give, for every free `x`,
//! `hi(x) = max_v (y_v − α d(x, v))` and `lo(x) = min_u (y_u + α d(u, x))`;
//! `max_x hi − lo` is the best value of `Δy − α len` over all paths, so a
//! Dinkelbach iteration on `α` finds the steepest path exactly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{check_labeled_components, finish, LabelSet, SolveResult};
use crate::error::Result;
use crate::graph::WeightedGraph;

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on (key, vertex)
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

const NONE: usize = usize::MAX;

struct State<'a> {
    graph: &'a WeightedGraph,
    len: Vec<f64>,
    terminal: Vec<bool>,
    f: Vec<f64>,
}

impl State<'_> {
    /// Keys `min_t (s·y_t + α d(t, x))` over terminals `t`, paths through
    /// free vertices only; returns keys and predecessors.
    fn sweep(&self, alpha: f64, s: f64) -> (Vec<f64>, Vec<usize>) {
        let n = self.graph.n();
        let mut key = vec![f64::INFINITY; n];
        let mut pred = vec![NONE; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for v in 0..n {
            if self.terminal[v] && self.graph.neighbors(v).iter().any(|&(u, _)| !self.terminal[u]) {
                key[v] = s * self.f[v];
                heap.push(Item(key[v], v));
            }
        }
        while let Some(Item(k, v)) = heap.pop() {
            if done[v] || k > key[v] {
                continue;
            }
            done[v] = true;
            for &(x, e) in self.graph.neighbors(v) {
                if self.terminal[x] || done[x] {
                    continue;
                }
                let c = k + alpha * self.len[e];
                if c < key[x] {
                    key[x] = c;
                    pred[x] = v;
                    heap.push(Item(c, x));
                } else if c == key[x] && v < pred[x] {
                    pred[x] = v;
                }
            }
        }
        (key, pred)
    }

    fn path_len(&self, path: &[usize]) -> f64 {
        path.windows(2)
            .map(|w| {
                let &(_, e) = self.graph.neighbors(w[0]).iter().find(|(u, _)| *u == w[1]).unwrap();
                self.len[e]
            })
            .sum()
    }

    /// Best path for slope `alpha`, oriented from low to high end.
    fn best_path(&self, alpha: f64) -> Option<(Vec<usize>, f64)> {
        let (lo, plo) = self.sweep(alpha, 1.0);
        let (hi, phi) = self.sweep(alpha, -1.0);
        let mut best = f64::NEG_INFINITY;
        let mut xstar = NONE;
        for x in 0..self.graph.n() {
            if self.terminal[x] || !lo[x].is_finite() || !hi[x].is_finite() {
                continue;
            }
            let v = -hi[x] - lo[x];
            if v > best {
                best = v;
                xstar = x;
            }
        }
        if xstar == NONE {
            return None;
        }
        let mut path = vec![xstar];
        while !self.terminal[*path.last().unwrap()] {
            path.push(plo[*path.last().unwrap()]);
        }
        path.reverse();
        let mut x = xstar;
        while !self.terminal[x] {
            x = phi[x];
            path.push(x);
        }
        // cut loops where the two halves meet again
        let mut simple: Vec<usize> = Vec::with_capacity(path.len());
        for v in path {
            if let Some(pos) = simple.iter().position(|u| *u == v) {
                simple.truncate(pos);
            }
            simple.push(v);
        }
        if simple.len() < 3 {
            // both halves end at the same terminal
            return Some((simple, 0.0));
        }
        let (a, b) = (simple[0], *simple.last().unwrap());
        let ratio = (self.f[b] - self.f[a]) / self.path_len(&simple);
        Some((simple, ratio))
    }

    /// Dinkelbach iteration from `guess`; `None` once no path has positive slope.
    fn steepest(&self, guess: f64) -> Option<(Vec<usize>, f64)> {
        let mut alpha = guess;
        let mut prev: Option<(Vec<usize>, f64)> = None;
        for _ in 0..1000 {
            let (path, ratio) = self.best_path(alpha)?;
            if let Some((_, r)) = &prev {
                if ratio <= r * (1.0 + 1e-13) {
                    return prev;
                }
            }
            if !(ratio > 0.0) {
                if alpha == 0.0 {
                    return None;
                }
                alpha = 0.0;
                prev = None;
                continue;
            }
            alpha = ratio;
            prev = Some((path, ratio));
        }
        prev
    }

    fn fix(&mut self, path: &[usize]) {
        let total = self.path_len(path);
        let (ya, yb) = (self.f[path[0]], self.f[*path.last().unwrap()]);
        let mut s = 0.0;
        for k in 1..path.len() - 1 {
            s += self.path_len(&path[k - 1..=k]);
            self.f[path[k]] = ya + (yb - ya) * s / total;
            self.terminal[path[k]] = true;
        }
    }

    /// Remaining free vertices take the value of their nearest terminal.
    fn fill_nearest(&mut self) {
        let n = self.graph.n();
        let mut dist = vec![f64::INFINITY; n];
        let mut origin = vec![NONE; n];
        let mut heap = BinaryHeap::new();
        for v in 0..n {
            if self.terminal[v] {
                dist[v] = 0.0;
                origin[v] = v;
                heap.push(Item(0.0, v));
            }
        }
        let mut done = vec![false; n];
        while let Some(Item(d, v)) = heap.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            for &(x, e) in self.graph.neighbors(v) {
                if self.terminal[x] || done[x] {
                    continue;
                }
                let c = d + self.len[e];
                if c < dist[x] || (c == dist[x] && origin[v] < origin[x]) {
                    dist[x] = c;
                    origin[x] = origin[v];
                    heap.push(Item(c, x));
                }
            }
        }
        for v in 0..n {
            if !self.terminal[v] {
                self.f[v] = self.f[origin[v]];
            }
        }
    }
}

/// Lex-minimal interpolant: minimizes the largest edge gradient
/// `w_ij |f_i − f_j|`, then the next largest, and so on.
pub fn solve_lex(graph: &WeightedGraph, labels: &LabelSet) -> Result<SolveResult> {
    check_labeled_components(graph, labels)?;
    let n = graph.n();
    let mut st = State {
        graph,
        len: graph.edges().iter().map(|e| 1.0 / e.w).collect(),
        terminal: vec![false; n],
        f: vec![0.0; n],
    };
    for &(v, y) in labels.entries() {
        st.terminal[v] = true;
        st.f[v] = y;
    }
    let mut trace = Vec::new();
    let mut guess = 0.0;
    let mut it = 0;
    while let Some((path, ratio)) = st.steepest(guess) {
        st.fix(&path);
        trace.push(ratio);
        guess = ratio;
        it += 1;
    }
    if st.terminal.iter().any(|t| !t) {
        st.fill_nearest();
    }
    let f = st.f;
    let objective = graph.gradients(&f).into_iter().fold(0.0, f64::max);
    Ok(finish(graph, f, objective, it, true, trace))
}
