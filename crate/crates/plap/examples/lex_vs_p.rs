//! As p grows the even-p solutions approach the lex-minimal one.

use plap::graph::WeightedGraph;
use plap::solve::{solve_even_p, solve_lex, LabelSet, SolveOptions};

fn main() -> plap::Result<()> {
    // centre 3 sees two leaves labeled 0 and one labeled 1; 4 hangs between 3 and a third 0
    let g = WeightedGraph::new(6, [(0, 3, 1.0), (1, 3, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0)])?;
    let labels = LabelSet::new(vec![(0, 0.0), (1, 0.0), (2, 1.0), (5, 0.0)])?;
    let opts = SolveOptions::default();
    let show = |name: &str, f: &[f64]| {
        let maxg = g.gradients(f).into_iter().fold(0.0, f64::max);
        println!("{name:>6}: f3 = {:.4}, f4 = {:.4}, max gradient {maxg:.4}", f[3], f[4]);
    };
    for p in [2, 4, 8, 16, 32] {
        show(&format!("p={p}"), &solve_even_p(&g, &labels, p, &opts)?.f);
    }
    show("lex", &solve_lex(&g, &labels)?.f);
    Ok(())
}
