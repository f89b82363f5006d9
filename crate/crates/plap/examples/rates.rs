//! RKHS versus Lipschitz least squares on the cluster target, both tuned by
//! cross-validation. The Lipschitz error grows as the cluster narrows.

use plap::density::make_cluster_instance;
use plap::estimators::{cross_validate, empirical_error, Family, RegressionSample};
use plap::experiment::logspace;
use plap::spectrum::KernelK;

fn main() -> plap::Result<()> {
    let (n, sigma, reps) = (256, 0.05, 5);
    println!("{:>6} {:>12} {:>12}", "eps", "rkhs mse", "lip mse");
    for eps in [0.1, 0.05, 0.01] {
        let inst = make_cluster_instance(eps)?;
        let rkhs = Family::Rkhs(KernelK::new(&inst.density)?);
        let lambdas = logspace(-9.0, 0.0, 10);
        let mut lips: Vec<f64> = (0..=16).map(|k| 2f64.powi(k)).collect();
        lips.push(1.0 / eps);
        let (mut a, mut b) = (0.0, 0.0);
        for rep in 0..reps {
            let s = RegressionSample::draw(&inst, n, sigma, 100 + rep)?;
            let cv = cross_validate(&rkhs, &s, &lambdas, 5, rep)?;
            a += empirical_error(&rkhs.fit(&s, cv.best_param)?, &inst.target, &s.xs);
            let cv = cross_validate(&Family::Lipschitz, &s, &lips, 5, rep)?;
            b += empirical_error(&Family::Lipschitz.fit(&s, cv.best_param)?, &inst.target, &s.xs);
        }
        println!("{eps:>6} {:>12.4e} {:>12.4e}", a / reps as f64, b / reps as f64);
    }
    Ok(())
}
