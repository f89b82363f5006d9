//! The rescaled graph energy of f(x) = x approaches C_p · I_p(f).

use plap::continuum::{c_p, i_p, Linear};
use plap::density::DensityModel;
use plap::graph::{build_graph, EdgeKernel};
use plap::quad::QuadratureSpec;

fn main() -> plap::Result<()> {
    let density = DensityModel::uniform_unit(1);
    let f = Linear { c: vec![1.0], c0: 0.0 };
    let quad = QuadratureSpec::Adaptive { tol: 1e-10 };
    let h = 0.05;
    for p in [2u32, 4] {
        let limit = c_p(EdgeKernel::Indicator, p, 1)? * i_p(&f, &density, p, &quad)?.value;
        let vals: Vec<f64> = (0..5)
            .map(|seed| {
                let g = build_graph(density.sample(2000, seed), EdgeKernel::Indicator, h)?;
                let fv: Vec<f64> = g.points.rows().map(|r| r[0]).collect();
                g.scaled_jp(&fv, p)
            })
            .collect::<plap::Result<_>>()?;
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        println!("p = {p}: graph {mean:.4}, limit {limit:.4}, ratio {:.3}", mean / limit);
    }
    Ok(())
}
