//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use plap::graph::WeightedGraph;
use plap::solve::LabelSet;

/// `argmin f` over `lo, lo + step, ..., hi`.
pub fn grid_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let m = ((hi - lo) / step).round() as usize;
    (0..=m).map(|k| lo + k as f64 * step).map(|x| (x, f(x))).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0
}

/// Exhaustive minimum of `max_ij w_ij |f_i − f_j|` over all assignments of
/// the free vertices to the grid `ymin, ymin + step, ..., ymax`.
///
/// The search is organized as min–max variable elimination, which visits
/// the same assignments as plain enumeration but in `O(V m^3)` for graphs
/// whose free part has elimination width at most 2.
pub fn grid_minimax(g: &WeightedGraph, labels: &LabelSet, step: f64) -> f64 {
    let n = g.n();
    let mut fixed = vec![None; n];
    for &(v, y) in labels.entries() {
        fixed[v] = Some(y);
    }
    let lo = labels.entries().iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let hi = labels.entries().iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let m = ((hi - lo) / step).round() as usize + 1;
    let grid: Vec<f64> = (0..m).map(|k| if k + 1 == m { hi } else { lo + k as f64 * step }).collect();

    let mut constant = 0.0f64;
    let mut unary: BTreeMap<usize, Vec<f64>> = (0..n).filter(|&v| fixed[v].is_none()).map(|v| (v, vec![0.0; m])).collect();
    // key (a, b) with a < b; table[ia * m + ib]
    let mut pair: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for e in g.edges() {
        match (fixed[e.i], fixed[e.j]) {
            (Some(a), Some(b)) => constant = constant.max(e.w * (a - b).abs()),
            (Some(y), None) | (None, Some(y)) => {
                let v = if fixed[e.i].is_none() { e.i } else { e.j };
                for (k, t) in unary.get_mut(&v).unwrap().iter_mut().enumerate() {
                    *t = t.max(e.w * (grid[k] - y).abs());
                }
            }
            (None, None) => {
                let t = pair.entry((e.i, e.j)).or_insert_with(|| vec![0.0; m * m]);
                for a in 0..m {
                    for b in 0..m {
                        t[a * m + b] = t[a * m + b].max(e.w * (grid[a] - grid[b]).abs());
                    }
                }
            }
        }
    }
    let get = |t: &Vec<f64>, key: (usize, usize), v: usize, av: usize, bu: usize| if key.0 == v { t[av * m + bu] } else { t[bu * m + av] };

    while let Some(&v) = unary
        .keys()
        .min_by_key(|&&v| (pair.keys().filter(|k| k.0 == v || k.1 == v).count(), v))
    {
        let keys: Vec<(usize, usize)> = pair.keys().filter(|k| k.0 == v || k.1 == v).cloned().collect();
        let uv = unary.remove(&v).unwrap();
        let tabs: Vec<((usize, usize), Vec<f64>)> = keys.iter().map(|k| (*k, pair.remove(k).unwrap())).collect();
        let other = |k: (usize, usize)| if k.0 == v { k.1 } else { k.0 };
        match tabs.len() {
            0 => constant = constant.max(uv.iter().cloned().fold(f64::INFINITY, f64::min)),
            1 => {
                let (k, t) = &tabs[0];
                let u = other(*k);
                let uu = unary.get_mut(&u).unwrap();
                for b in 0..m {
                    let best = (0..m).map(|a| uv[a].max(get(t, *k, v, a, b))).fold(f64::INFINITY, f64::min);
                    uu[b] = uu[b].max(best);
                }
            }
            2 => {
                let ((k1, t1), (k2, t2)) = (&tabs[0], &tabs[1]);
                let (u, x) = (other(*k1), other(*k2));
                let mut q = vec![0.0; m * m];
                for b in 0..m {
                    for c in 0..m {
                        let mut best = f64::INFINITY;
                        for a in 0..m {
                            let s = uv[a].max(get(t1, *k1, v, a, b)).max(get(t2, *k2, v, a, c));
                            if s < best {
                                best = s;
                            }
                        }
                        q[b * m + c] = best;
                    }
                }
                // q is indexed (u, x); store under (min, max)
                let key = (u.min(x), u.max(x));
                let t = pair.entry(key).or_insert_with(|| vec![0.0; m * m]);
                for b in 0..m {
                    for c in 0..m {
                        let idx = if key.0 == u { b * m + c } else { c * m + b };
                        t[idx] = t[idx].max(q[b * m + c]);
                    }
                }
            }
            w => panic!("elimination width {w} at vertex {v} is too large for the grid oracle"),
        }
    }
    constant
}

/// Gradients sorted descending.
pub fn sorted_gradients(g: &WeightedGraph, f: &[f64]) -> Vec<f64> {
    let mut v = g.gradients(f);
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `a <= b` lexicographically, entries compared with tolerance `tol`.
pub fn lex_le(a: &[f64], b: &[f64], tol: f64) -> bool {
    for (x, y) in a.iter().zip(b) {
        if *x < y - tol {
            return true;
        }
        if *x > y + tol {
            return false;
        }
    }
    true
}

/// Small graphs with at most five free vertices, and their labels.
pub fn small_lex_instances() -> Vec<(&'static str, WeightedGraph, LabelSet)> {
    let ls = |v: &[(usize, f64)]| LabelSet::new(v.to_vec()).unwrap();
    let wg = |n: usize, e: &[(usize, usize, f64)]| WeightedGraph::new(n, e.iter().cloned()).unwrap();
    vec![
        ("path3 unit", WeightedGraph::path(&[1.0, 1.0]), ls(&[(0, 0.0), (2, 1.0)])),
        ("path3 weighted", WeightedGraph::path(&[1.0, 2.0]), ls(&[(0, 0.0), (2, 1.0)])),
        ("path5 unit", WeightedGraph::path(&[1.0; 4]), ls(&[(0, 0.0), (4, 1.0)])),
        ("path7 weighted", WeightedGraph::path(&[1.0, 0.5, 2.0, 1.0, 1.5, 0.8]), ls(&[(0, -1.0), (6, 1.0)])),
        ("star", wg(4, &[(0, 1, 1.0), (0, 2, 2.0), (0, 3, 0.5)]), ls(&[(1, 0.0), (2, 0.0), (3, 3.0)])),
        (
            "two paths",
            wg(7, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 4, 1.0), (4, 5, 1.0), (5, 3, 1.0), (1, 6, 1.0)]),
            ls(&[(0, 0.0), (3, 1.0), (6, 0.9)]),
        ),
        (
            "ladder",
            wg(8, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (4, 5, 1.0), (5, 6, 1.0), (6, 7, 1.0), (0, 4, 1.0), (1, 5, 0.5), (2, 6, 0.5), (3, 7, 1.0)]),
            ls(&[(0, 0.0), (3, 1.0), (7, 0.5)]),
        ),
        (
            "cycle with chord",
            wg(6, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (5, 0, 1.0), (1, 4, 0.7)]),
            ls(&[(0, 0.0), (3, 2.0)]),
        ),
        ("pendant", wg(5, &[(0, 1, 1.0), (1, 2, 1.0), (1, 3, 2.0), (3, 4, 1.0)]), ls(&[(0, 0.0), (2, 1.0)])),
        ("two components", wg(6, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0), (4, 5, 3.0)]), ls(&[(0, 0.0), (2, 1.0), (3, 0.5), (5, -0.5)])),
    ]
}
