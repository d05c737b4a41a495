//! Sparse symmetric matrices and a shift-invert subspace eigensolver.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// Compressed sparse rows, both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` entries; duplicates are summed.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            last = Some((r, c));
            cols.push(c);
            vals.push(v);
            row_ptr[r + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        });
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.cols[k] == i)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).all(|k| {
                let j = self.cols[k];
                let back = (self.row_ptr[j]..self.row_ptr[j + 1])
                    .find(|&m| self.cols[m] == i)
                    .map_or(0.0, |m| self.vals[m]);
                (back - self.vals[k]).abs() <= tol * self.vals[k].abs().max(1.0)
            })
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for `(A - shift I) x = b`, which must
/// be positive definite. `x` holds the initial guess on entry.
fn pcg(a: &CsrMatrix, inv_diag: &[f64], shift: f64, b: &[f64], x: &mut [f64], rtol: f64) -> Result<usize> {
    let n = a.n;
    let mut ax = vec![0.0; n];
    a.matvec(x, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|i| b[i] - ax[i] + shift * x[i]).collect();
    let bnorm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, d)| ri * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = 20 * n.max(100);
    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= rtol * bnorm {
            return Ok(it);
        }
        a.matvec(&p, &mut ap);
        for i in 0..n {
            ap[i] -= shift * p[i];
        }
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverBreakdown(format!(
                "shifted operator is not positive definite (p^T A p = {pap:e})"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverBreakdown(format!("PCG did not converge in {max_iter} iterations")))
}

/// Converged lowest eigenpairs; `vectors` has one column per eigenvalue.
#[derive(Debug, Clone)]
pub struct EigenBlock {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// The `k` lowest eigenpairs of `a` by block inverse iteration on `(A - shift)^{-1}`
/// with Rayleigh-Ritz. `shift` must lie strictly below the spectrum.
pub fn lowest_eigenpairs(a: &CsrMatrix, k: usize, shift: f64, seed: u64) -> Result<EigenBlock> {
    let n = a.n;
    let p = (k + k.max(8) / 2 + 4).min(n);
    if k == 0 || k > n {
        return Err(Error::TooManyEigenvalues { requested: k, dim: n });
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / (d - shift)).collect();
    if inv_diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::SolverBreakdown("shift is not below the diagonal".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::from_fn(n, p, |_, _| rng.gen::<f64>() - 0.5);
    x = x.qr().q();
    let mut theta = vec![0.0; p];
    let mut y = DMatrix::zeros(n, p);
    let max_iter = 300;
    for iter in 1..=max_iter {
        let cols: Vec<Vec<f64>> = (0..p)
            .into_par_iter()
            .map(|j| {
                let b: Vec<f64> = x.column(j).iter().copied().collect();
                let guess = if iter > 1 && theta[j] - shift > 0.0 { 1.0 / (theta[j] - shift) } else { 0.0 };
                let mut sol: Vec<f64> = b.iter().map(|v| v * guess).collect();
                pcg(a, &inv_diag, shift, &b, &mut sol, 1e-12).map(|_| sol)
            })
            .collect::<Result<_>>()?;
        for (j, c) in cols.iter().enumerate() {
            y.column_mut(j).copy_from_slice(c);
        }
        let q = y.clone().qr().q();
        let mut aq = DMatrix::zeros(n, p);
        let mut buf = vec![0.0; n];
        for j in 0..p {
            let col: Vec<f64> = q.column(j).iter().copied().collect();
            a.matvec(&col, &mut buf);
            aq.column_mut(j).copy_from_slice(&buf);
        }
        let h = q.transpose() * &aq;
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let w = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
        theta = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        x = &q * &w;
        let ax = &aq * &w;
        let scale = theta.iter().take(k).fold(shift.abs(), |m, t| m.max(t.abs())).max(1e-300);
        let residuals: Vec<f64> = (0..k)
            .map(|j| (ax.column(j) - x.column(j) * theta[j]).norm())
            .collect();
        if residuals.iter().all(|r| *r <= 1e-9 * scale) {
            return Ok(EigenBlock {
                values: theta[..k].to_vec(),
                vectors: x.columns(0, k).into_owned(),
                residuals,
                iterations: iter,
            });
        }
    }
    Err(Error::SolverBreakdown(format!("subspace iteration did not converge in {max_iter} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn square_dirichlet_laplacian() {
        let m = 30;
        let n = m * m;
        let h = 1.0 / (m + 1) as f64;
        let idx = |i: usize, j: usize| i * m + j;
        let mut t = Vec::new();
        for i in 0..m {
            for j in 0..m {
                t.push((idx(i, j), idx(i, j), 4.0 / (h * h)));
                if i + 1 < m {
                    t.push((idx(i, j), idx(i + 1, j), -1.0 / (h * h)));
                    t.push((idx(i + 1, j), idx(i, j), -1.0 / (h * h)));
                }
                if j + 1 < m {
                    t.push((idx(i, j), idx(i, j + 1), -1.0 / (h * h)));
                    t.push((idx(i, j + 1), idx(i, j), -1.0 / (h * h)));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        assert!(a.is_symmetric(1e-14));
        let block = lowest_eigenpairs(&a, 6, -1.0, 7).unwrap();
        let lam = |p: usize| 4.0 / (h * h) * (p as f64 * PI * h / 2.0).sin().powi(2);
        let mut want: Vec<f64> = (1..5)
            .flat_map(|p| (1..5).map(move |q| (p, q)))
            .map(|(p, q)| lam(p) + lam(q))
            .collect();
        want.sort_by(f64::total_cmp);
        for (got, w) in block.values.iter().zip(&want) {
            assert_abs_diff_eq!(*got, *w, epsilon = 1e-8 * w);
        }
    }
}
