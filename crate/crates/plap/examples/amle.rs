//! The distance function is infinity-harmonic away from the origin but not
//! harmonic.

use plap::continuum::{infinity_laplacian, laplacian, RadialPower};

fn main() {
    let f = RadialPower::norm(3);
    for x in [[0.5, 0.0, 0.0], [0.3, -0.4, 0.2], [0.0, 0.6, 0.8]] {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        println!(
            "|x| = {r:.3}: inf-laplacian {:+.2e}, laplacian {:.6} (2/|x| = {:.6})",
            infinity_laplacian(&f, &x, 1e-4),
            laplacian(&f, &x, 1e-4),
            2.0 / r
        );
    }
}
