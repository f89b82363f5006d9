//! Sparse symmetric systems: Jacobi-preconditioned CG with a dense fallback.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric matrix in CSR form; both triangles stored, diagonal separate.
#[derive(Clone, Debug)]
pub struct SparseSym {
    pub diag: Vec<f64>,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// From a diagonal and off-diagonal triples `(i, j, v)` with `i != j`;
    /// each triple is mirrored to `(j, i)`.
    pub fn new(diag: Vec<f64>, off: &[(usize, usize, f64)]) -> Self {
        let n = diag.len();
        let mut cnt = vec![0usize; n + 1];
        for &(i, j, _) in off {
            cnt[i + 1] += 1;
            cnt[j + 1] += 1;
        }
        for k in 0..n {
            cnt[k + 1] += cnt[k];
        }
        let offsets = cnt.clone();
        let mut fill = cnt;
        let mut cols = vec![0; 2 * off.len()];
        let mut vals = vec![0.0; 2 * off.len()];
        for &(i, j, v) in off {
            cols[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
            cols[fill[j]] = i;
            vals[fill[j]] = v;
            fill[j] += 1;
        }
        SparseSym { diag, offsets, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n() {
            let mut s = self.diag[i] * x[i];
            for k in self.offsets[i]..self.offsets[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for k in self.offsets[i]..self.offsets[i + 1] {
                m[(i, self.cols[k])] += self.vals[k];
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CgReport {
    pub iterations: usize,
    pub rel_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` by Jacobi-preconditioned CG from the initial guess in `x`.
pub fn pcg(a: &SparseSym, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> CgReport {
    let n = a.n();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgReport { iterations: 0, rel_residual: 0.0, converged: true };
    }
    let inv: Vec<f64> = a.diag.iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = vec![0.0; n];
    a.mul(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(r, m)| r * m).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = norm(&r) / bnorm;
    let mut it = 0;
    while res > tol && it < max_iter {
        a.mul(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
        // recompute the true residual now and then to avoid drift
        if it % 50 == 0 {
            a.mul(x, &mut q);
            for i in 0..n {
                r[i] = b[i] - q[i];
            }
        }
        res = norm(&r) / bnorm;
    }
    CgReport { iterations: it, rel_residual: res, converged: res <= tol }
}

pub const DENSE_MAX: usize = 2000;

/// Dense Cholesky, then LU if the matrix is not numerically positive definite.
pub fn dense_solve(a: DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let rhs = DVector::from_column_slice(b);
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch.solve(&rhs).as_slice().to_vec());
    }
    a.lu().solve(&rhs).map(|v| v.as_slice().to_vec()).ok_or(Error::SingularSystem)
}

/// PCG with the dense fallback for small systems that fail to converge.
pub fn solve_spd(a: &SparseSym, b: &[f64], x0: &[f64], tol: f64) -> Result<(Vec<f64>, CgReport)> {
    let mut x = x0.to_vec();
    let rep = pcg(a, b, &mut x, tol, 20 * a.n().max(50));
    if rep.converged {
        return Ok((x, rep));
    }
    if a.n() <= DENSE_MAX {
        let x = dense_solve(a.to_dense(), b)?;
        let mut r = vec![0.0; a.n()];
        a.mul(&x, &mut r);
        let res = r.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt() / norm(b).max(f64::MIN_POSITIVE);
        return Ok((x, CgReport { iterations: rep.iterations, rel_residual: res, converged: true }));
    }
    Ok((x, rep))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_matches_dense() {
        // 1D Dirichlet Laplacian
        let n = 30;
        let off: Vec<_> = (0..n - 1).map(|i| (i, i + 1, -1.0)).collect();
        let a = SparseSym::new(vec![2.0; n], &off);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; n];
        let rep = pcg(&a, &b, &mut x, 1e-12, 1000);
        assert!(rep.converged);
        let y = dense_solve(a.to_dense(), &b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-9);
        }
    }
}
