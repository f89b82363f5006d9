//! Two Gaussian clusters, one label in each: p = 2 flattens out between the
//! labels as N grows, while the lex (p = ∞) solution keeps a ramp.

use plap::density::DensityModel;
use plap::experiment::demo::{build_labeled, LabelPoint};
use plap::graph::EdgeKernel;
use plap::solve::{solve_lex, solve_p2, SolveOptions};

fn main() -> plap::Result<()> {
    let density = DensityModel::two_gaussians_1d(0.0, 4.0, 1.0);
    let sample = density.sample(1000, 11);
    let labels = [LabelPoint { at: vec![0.0], value: -1.0 }, LabelPoint { at: vec![4.0], value: 1.0 }];
    let lg = build_labeled(&labels, &sample, EdgeKernel::gaussian(), 0.4)?;
    let xs: Vec<f64> = lg.points.rows().map(|r| r[0]).collect();

    let p2 = solve_p2(&lg.graph, &lg.labels, &SolveOptions::default())?;
    let lex = solve_lex(&lg.graph, &lg.labels)?;
    println!("{} vertices ({} dropped), {} edges", lg.graph.n(), lg.dropped, lg.graph.edges().len());
    println!("p = 2: {} iterations, J_2 = {:.4e}", p2.iterations, p2.objective);
    println!("p = inf: max gradient {:.4e}", lex.objective);

    println!("{:>6} {:>9} {:>9}", "x", "f_2", "f_inf");
    for target in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5] {
        let i = (2..xs.len()).min_by(|&a, &b| (xs[a] - target).abs().total_cmp(&(xs[b] - target).abs())).unwrap();
        println!("{:>6.3} {:>9.4} {:>9.4}", xs[i], p2.f[i], lex.f[i]);
    }
    Ok(())
}
