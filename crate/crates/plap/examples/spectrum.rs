//! Eigenvalues of the cluster kernel and the rates they imply.

use plap::spectrum::{eigen_bound, eigenvalues, rate_bounds};

fn main() -> plap::Result<()> {
    for eps in [0.1, 0.01] {
        let s = eigenvalues(eps, 2)?;
        println!("eps = {eps}: period {:.3}, {} roots per period, x0 = {:.5}", s.period, s.roots.len(), s.roots[0]);
        for e in s.values.iter().take(6) {
            let bound = eigen_bound(eps, e.k, e.j).map(|b| format!("{b:.3e}")).unwrap_or_else(|_| "-".into());
            println!("  (k {}, j {}) gamma {:.4e}  bound {bound}", e.k, e.j, e.gamma);
        }
    }
    println!("{:>6} {:>8} {:>10} {:>10} {:>10}", "n", "eps", "delta_n", "l2", "linf");
    for n in [100, 1000, 10_000] {
        for eps in [0.1, 0.01] {
            let r = rate_bounds(n, 1.0, eps)?;
            println!("{n:>6} {eps:>8} {:>10.3e} {:>10.3e} {:>10.3e}", r.delta_n, r.l2_rate, r.linf_rate);
        }
    }
    Ok(())
}
