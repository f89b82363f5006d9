//! The penalized problem is the constrained one at its own fitted labels.

use plap::graph::WeightedGraph;
use plap::solve::{solve_even_p, solve_penalized, LabelSet, SolveOptions};

fn main() -> plap::Result<()> {
    let g = WeightedGraph::new(6, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 4, 0.5), (4, 5, 1.0), (0, 5, 0.3), (1, 4, 0.7)])?;
    let labels = LabelSet::new(vec![(0, -1.0), (3, 2.0), (5, 0.5)])?;
    let opts = SolveOptions::default();
    for p in [2, 4] {
        for lambda in [0.1, 1.0, 10.0] {
            let pen = solve_penalized(&g, &labels, p, lambda, &opts)?;
            let fitted = LabelSet::new(labels.entries().iter().map(|&(v, _)| (v, pen.f[v])).collect())?;
            let con = solve_even_p(&g, &fitted, p, &opts)?;
            println!("p = {p}, lambda = {lambda:>4}: J_p {:.8} vs {:.8}", g.j_p(&pen.f, p)?, con.objective);
        }
    }
    Ok(())
}
