mod common;

use approx::assert_abs_diff_eq;
use common::{grid_argmin, grid_minimax, lex_le, small_lex_instances, sorted_gradients};
use plap::density::DensityModel;
use plap::experiment::penalized::{random_instance, Params as RandomGraphs};
use plap::graph::WeightedGraph;
use plap::solve::{solve_even_p, solve_lex, solve_p2, solve_penalized, LabelSet, SolveOptions};
use plap::Error;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn labels(v: &[(usize, f64)]) -> LabelSet {
    LabelSet::new(v.to_vec()).unwrap()
}

fn random_graphs(count: usize, n_max: usize, seed: u64) -> Vec<(WeightedGraph, LabelSet)> {
    let p = RandomGraphs { n_min: 10, n_max, h: 0.25, ..RandomGraphs::default() };
    (0..count).map(|k| random_instance(&p, seed + k as u64).unwrap()).collect()
}

#[test]
fn p2_examples() {
    let l = labels(&[(0, 0.0), (2, 1.0)]);
    let r = solve_p2(&WeightedGraph::path(&[1.0, 1.0]), &l, &opts()).unwrap();
    assert_abs_diff_eq!(r.f[1], 0.5, epsilon = 1e-12);

    let r = solve_p2(&WeightedGraph::path(&[1.0, 2.0]), &l, &opts()).unwrap();
    let oracle = grid_argmin(|f| f * f + 4.0 * (1.0 - f).powi(2), 0.0, 1.0, 1e-6);
    assert_abs_diff_eq!(r.f[1], 0.8, epsilon = 1e-12);
    assert_abs_diff_eq!(r.f[1], oracle, epsilon = 1e-6);
    assert_eq!(r.f[0], 0.0);
    assert_eq!(r.f[2], 1.0);

    let g = WeightedGraph::path(&[1.0, 3.0]);
    let all = labels(&[(0, 0.2), (1, 0.7), (2, -1.0)]);
    let r = solve_p2(&g, &all, &opts()).unwrap();
    assert_eq!(r.f, vec![0.2, 0.7, -1.0]);
    assert_abs_diff_eq!(r.objective, g.j_p(&r.f, 2).unwrap(), epsilon = 1e-15);
}

#[test]
fn unlabeled_component_is_reported() {
    let g = WeightedGraph::new(5, [(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
    let l = labels(&[(0, 0.0)]);
    for r in [solve_p2(&g, &l, &opts()), solve_even_p(&g, &l, 4, &opts()), solve_lex(&g, &l), solve_penalized(&g, &l, 2, 1.0, &opts())] {
        match r {
            Err(Error::UnlabeledComponent { vertex, size, .. }) => {
                assert_eq!(vertex, 2);
                assert_eq!(size, 3);
            }
            other => panic!("expected unlabeled component error, got {other:?}"),
        }
    }
}

#[test]
fn label_set_validation() {
    assert!(LabelSet::new(vec![]).is_err());
    assert!(LabelSet::new(vec![(1, 0.0), (1, 1.0)]).is_err());
    assert!(LabelSet::new(vec![(0, f64::NAN)]).is_err());
    let g = WeightedGraph::path(&[1.0]);
    assert!(matches!(solve_p2(&g, &labels(&[(5, 1.0)]), &opts()), Err(Error::VertexRange { .. })));
}

#[test]
fn p2_stationarity() {
    for (g, l) in random_graphs(5, 150, 100) {
        let r = solve_p2(&g, &l, &opts()).unwrap();
        let labeled: Vec<usize> = l.entries().iter().map(|e| e.0).collect();
        for v in (0..g.n()).filter(|v| !labeled.contains(v)) {
            let (mut num, mut den) = (0.0, 0.0);
            for &(u, e) in g.neighbors(v) {
                let w2 = g.edges()[e].w.powi(2);
                num += w2 * r.f[u];
                den += w2;
            }
            if den > 0.0 {
                assert!((r.f[v] - num / den).abs() < 1e-8, "vertex {v}");
            }
        }
    }
}

#[test]
fn even_p_examples() {
    let l = labels(&[(0, 0.0), (2, 1.0)]);
    let r = solve_even_p(&WeightedGraph::path(&[1.0, 1.0]), &l, 4, &opts()).unwrap();
    assert_abs_diff_eq!(r.f[1], 0.5, epsilon = 1e-8);

    let r = solve_even_p(&WeightedGraph::path(&[1.0, 2.0]), &l, 4, &opts()).unwrap();
    let exact = 1.0 / (1.0 + 16f64.powf(-1.0 / 3.0));
    assert_abs_diff_eq!(r.f[1], exact, epsilon = 1e-8);
    let oracle = grid_argmin(|f| f.powi(4) + 16.0 * (1.0 - f).powi(4), 0.0, 1.0, 1e-6);
    assert_abs_diff_eq!(r.f[1], oracle, epsilon = 1e-5);

    let star = WeightedGraph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
    let r = solve_even_p(&star, &labels(&[(1, 0.0), (2, 0.0), (3, 3.0)]), 4, &opts()).unwrap();
    let oracle = grid_argmin(|f| 2.0 * f.powi(4) + (3.0 - f).powi(4), 0.0, 3.0, 1e-6);
    assert!((r.f[0] - oracle).abs() <= 1e-4, "{} vs {oracle}", r.f[0]);

    for p in [1, 3, 5] {
        assert!(matches!(solve_even_p(&star, &labels(&[(1, 0.0)]), p, &opts()), Err(Error::Exponent(_))));
    }
}

#[test]
fn even_p_grid_oracles() {
    // star with weighted spokes, several exponents
    let w = [1.0, 2.0, 0.5, 1.5];
    let y = [0.0, 1.0, 3.0, -1.0];
    let star = WeightedGraph::new(5, (0..4).map(|k| (0, k + 1, w[k]))).unwrap();
    let l = labels(&(0..4).map(|k| (k + 1, y[k])).collect::<Vec<_>>());
    for p in [2u32, 4, 6, 8] {
        let r = solve_even_p(&star, &l, p, &opts()).unwrap();
        let obj = |f: f64| (0..4).map(|k| (w[k] * (f - y[k])).powi(p as i32)).sum::<f64>();
        let oracle = grid_argmin(obj, -1.0, 3.0, 1e-6);
        assert!((r.f[0] - oracle).abs() <= 1e-4, "p = {p}: {} vs {oracle}", r.f[0]);
    }
}

#[test]
fn irls_objective_is_monotone() {
    for (g, l) in random_graphs(4, 120, 200) {
        for p in [4, 6] {
            let r = solve_even_p(&g, &l, p, &opts()).unwrap();
            assert!(r.converged);
            for w in r.trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "objective increased {} -> {}", w[0], w[1]);
            }
        }
    }
}

#[test]
fn even_p_at_two_agrees_with_p2() {
    for (g, l) in random_graphs(6, 200, 300) {
        let a = solve_p2(&g, &l, &opts()).unwrap();
        let b = solve_even_p(&g, &l, 2, &opts()).unwrap();
        for (x, y) in a.f.iter().zip(&b.f) {
            assert!((x - y).abs() < 1e-6);
        }
    }
}

#[test]
fn lex_examples() {
    let l = labels(&[(0, 0.0), (2, 1.0)]);
    let r = solve_lex(&WeightedGraph::path(&[1.0, 1.0]), &l).unwrap();
    assert_abs_diff_eq!(r.f[1], 0.5, epsilon = 1e-12);

    let r = solve_lex(&WeightedGraph::path(&[1.0, 2.0]), &l).unwrap();
    assert_abs_diff_eq!(r.f[1], 2.0 / 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.objective, 2.0 / 3.0, epsilon = 1e-12);

    let r = solve_lex(&WeightedGraph::path(&[1.0; 4]), &labels(&[(0, 0.0), (4, 1.0)])).unwrap();
    for (k, v) in r.f.iter().enumerate() {
        assert_abs_diff_eq!(*v, 0.25 * k as f64, epsilon = 1e-12);
    }
}

#[test]
fn lex_matches_grid_oracle() {
    for (name, g, l) in small_lex_instances() {
        let r = solve_lex(&g, &l).unwrap();
        let oracle = grid_minimax(&g, &l, 1e-3);
        assert!((r.objective - oracle).abs() <= 1e-3, "{name}: {} vs {oracle}", r.objective);
        for &(v, y) in l.entries() {
            assert_eq!(r.f[v], y, "{name}");
        }
    }
}

#[test]
fn lex_off_path_vertices_take_nearest_terminal() {
    // vertex 3 hangs off vertex 1, vertex 4 off vertex 3
    let g = WeightedGraph::new(5, [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 2.0), (3, 4, 1.0)]).unwrap();
    let r = solve_lex(&g, &labels(&[(0, 0.0), (2, 1.0)])).unwrap();
    assert_abs_diff_eq!(r.f[1], 0.5, epsilon = 1e-12);
    assert_eq!(r.f[3], r.f[1]);
    assert_eq!(r.f[4], r.f[1]);
}

#[test]
fn lex_is_lex_minimal_against_perturbations() {
    use rand::Rng as _;
    let mut rng = plap::rng::rng(7);
    for (g, l) in random_graphs(4, 40, 400) {
        let r = solve_lex(&g, &l).unwrap();
        let base = sorted_gradients(&g, &r.f);
        let labeled: Vec<usize> = l.entries().iter().map(|e| e.0).collect();
        for _ in 0..200 {
            let mut f = r.f.clone();
            let scale = 10f64.powf(rng.random_range(-4.0..-1.0));
            for v in (0..g.n()).filter(|v| !labeled.contains(v)) {
                f[v] += scale * rng.random_range(-1.0..1.0);
            }
            assert!(lex_le(&base, &sorted_gradients(&g, &f), 1e-12));
        }
        for p in [2, 4, 8] {
            let e = solve_even_p(&g, &l, p, &opts()).unwrap();
            assert!(lex_le(&base, &sorted_gradients(&g, &e.f), 1e-9), "p = {p}");
        }
    }
}

#[test]
fn maximum_principle() {
    for (g, l) in random_graphs(6, 150, 500) {
        let lo = l.entries().iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        let hi = l.entries().iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        let sols = [
            solve_p2(&g, &l, &opts()).unwrap().f,
            solve_even_p(&g, &l, 4, &opts()).unwrap().f,
            solve_even_p(&g, &l, 8, &opts()).unwrap().f,
            solve_lex(&g, &l).unwrap().f,
        ];
        for f in &sols {
            assert!(f.iter().all(|v| *v >= lo - 1e-9 && *v <= hi + 1e-9));
        }
    }
}

#[test]
fn max_gradient_decreases_with_p() {
    for (g, l) in random_graphs(4, 100, 600) {
        let mut prev = f64::INFINITY;
        for p in [2, 4, 8, 16] {
            let r = solve_even_p(&g, &l, p, &opts()).unwrap();
            let m = r.gradients.iter().cloned().fold(0.0, f64::max);
            assert!(m <= prev * (1.0 + 1e-6), "p = {p}: {m} > {prev}");
            prev = m;
        }
        let lex = solve_lex(&g, &l).unwrap().objective;
        assert!(lex <= prev * (1.0 + 1e-9));
    }
}

#[test]
fn penalized_examples() {
    let g = WeightedGraph::path(&[1.0]);
    let r = solve_penalized(&g, &labels(&[(0, 0.0), (1, 1.0)]), 2, 1.0, &opts()).unwrap();
    // [[2, -1], [-1, 2]] f = [0, 1]
    assert_abs_diff_eq!(r.f[0], 1.0 / 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.f[1], 2.0 / 3.0, epsilon = 1e-12);

    let g = WeightedGraph::path(&[1.0, 2.0]);
    let l = labels(&[(0, 0.0), (2, 1.0)]);
    for p in [2, 4] {
        let r = solve_penalized(&g, &l, p, 1e-10, &opts()).unwrap();
        assert!((r.f[0] - 0.0).abs() < 1e-4 && (r.f[2] - 1.0).abs() < 1e-4, "p = {p}: {:?}", r.f);
    }

    let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0)]).unwrap();
    for p in [2, 4] {
        for lambda in [0.1, 1.0, 10.0] {
            let r = solve_penalized(&g, &labels(&[(2, 0.7)]), p, lambda, &opts()).unwrap();
            for v in &r.f {
                assert_abs_diff_eq!(*v, 0.7, epsilon = 1e-9);
            }
        }
    }
    assert!(solve_penalized(&g, &labels(&[(2, 0.7)]), 2, 0.0, &opts()).is_err());
}

#[test]
fn penalized_is_stationary() {
    // gradient of Σ_O (f − y)^2 + λ J_p vanishes at the solution
    for (g, l) in random_graphs(3, 60, 700) {
        for p in [2u32, 4] {
            let lambda = 0.5;
            let r = solve_penalized(&g, &l, p, lambda, &SolveOptions { rel_tol: 1e-14, ..opts() }).unwrap();
            let mut grad = vec![0.0; g.n()];
            for &(v, y) in l.entries() {
                grad[v] += 2.0 * (r.f[v] - y);
            }
            for e in g.edges() {
                let d = r.f[e.i] - r.f[e.j];
                let t = lambda * p as f64 * e.w.powi(p as i32) * d.abs().powi(p as i32 - 2) * d;
                grad[e.i] += t;
                grad[e.j] -= t;
            }
            let worst = grad.iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert!(worst < 1e-6, "p = {p}: gradient {worst}");
        }
    }
}

#[test]
fn penalized_constrained_equivalence() {
    let p = RandomGraphs::default();
    for k in 0..4 {
        let (g, l) = random_instance(&p, 800 + k).unwrap();
        for q in [2, 4] {
            let (a, b) = plap::experiment::penalized::equivalence(&g, &l, q, 1.0, &p.solver).unwrap();
            assert!((a - b).abs() / a.max(1.0) <= 1e-6, "{a} vs {b}");
        }
    }
}

#[test]
fn solutions_on_geometric_graph_are_deterministic() {
    let pts = DensityModel::uniform_unit(2).sample(300, 1);
    let g = plap::graph::build_graph(pts, plap::graph::EdgeKernel::gaussian(), 0.3).unwrap().graph;
    let l = labels(&[(0, 0.0), (1, 1.0), (2, -1.0)]);
    assert_eq!(solve_lex(&g, &l).unwrap().f, solve_lex(&g, &l).unwrap().f);
    assert_eq!(solve_even_p(&g, &l, 4, &opts()).unwrap().f, solve_even_p(&g, &l, 4, &opts()).unwrap().f);
}
