//! Spike functions have vanishing energy when p < d and blow up when p > d;
//! at p = d a logarithmic profile decays only like 1 / log(1/ε).

use plap::continuum::{log_family, spike_family, spike_integral};
use plap::density::DensityModel;
use plap::quad::QuadratureSpec;

fn main() -> plap::Result<()> {
    let quad = QuadratureSpec::Adaptive { tol: 1e-10 };
    let cube = |d| DensityModel::Uniform { lo: vec![-1.0; d], hi: vec![1.0; d] };
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "eps", "p2 d3", "bound", "p4 d3", "log d2");
    for eps in [0.1, 0.05, 0.025, 0.0125] {
        let s = spike_family(2, 3, eps, &cube(3), &quad)?;
        let t = spike_integral(4, 3, eps, &cube(3), &quad)?;
        let l = log_family(2, eps, &cube(2), &quad)?;
        println!("{eps:>8} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}", s.value, s.paper_bound, t.value, l.value);
    }
    Ok(())
}
