//! Eigenvalues of symmetric tridiagonal and cyclic tridiagonal matrices by
//! Sturm-count bisection, eigenvectors by inverse iteration.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

/// Symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// Tridiagonal plus the corner element `corner` coupling the first and last rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub band: SymTridiagonal,
    pub corner: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeridianMatrix {
    Tridiagonal(SymTridiagonal),
    Cyclic(CyclicTridiagonal),
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    /// Number of eigenvalues strictly below `x` (Sturm count via the `LDL^T` pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt() * self.norm_bound().max(1.0);
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let b2 = if i > 0 { self.off[i - 1] * self.off[i - 1] } else { 0.0 };
            q = self.diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q.abs() < tiny {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` lowest eigenvalues, ascending, each to within a few `eps * |M|`.
    pub fn lowest(&self, k: usize) -> Result<Vec<f64>> {
        bisect_lowest(|x| self.count_below(x), self.gershgorin(), self.len(), k)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Eigenvector for an eigenvalue estimate `lambda` by inverse iteration with
    /// partial pivoting. Normalized to unit 2-norm, largest entry positive.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let shift = lambda - 64.0 * f64::EPSILON * self.norm_bound().max(1.0);
        let lu = BandLu::factor(self, shift);
        // a deterministic start that is not orthogonal to smooth modes
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        for _ in 0..4 {
            x = lu.solve(&x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        let big = x.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if big < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        x
    }
}

/// The `k` lowest eigenvalues of a matrix of dimension `n` from its Sturm count.
fn bisect_lowest(count: impl Fn(f64) -> usize, (glo, ghi): (f64, f64), n: usize, k: usize) -> Result<Vec<f64>> {
    if k > n {
        return Err(Error::TooManyEigenvalues { requested: k, dim: n });
    }
    let norm = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
    let tol = 4.0 * f64::EPSILON * norm;
    let mut out = Vec::with_capacity(k);
    let mut floor = glo - tol;
    for i in 0..k {
        let (mut a, mut b) = (floor, ghi + tol);
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if count(mid) > i {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.push(0.5 * (a + b));
        floor = a;
    }
    Ok(out)
}

/// LU of `T - shift I` with partial pivoting (upper bandwidth grows to two).
struct BandLu {
    // row i of U: u0 on the diagonal, u1, u2 to the right
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl BandLu {
    fn factor(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.len();
        let eps = f64::EPSILON * t.norm_bound().max(1.0);
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        // working row i: (d, e, f) at columns i, i+1, i+2
        let mut d = t.diag.first().copied().unwrap_or(0.0) - shift;
        let mut e = t.off.first().copied().unwrap_or(0.0);
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if d.abs() < eps { eps } else { d };
                break;
            }
            let below_d = t.off[i];
            let below_e = t.diag[i + 1] - shift;
            let below_f = t.off.get(i + 1).copied().unwrap_or(0.0);
            if below_d.abs() > d.abs() {
                swapped[i] = true;
                u0[i] = below_d;
                u1[i] = below_e;
                u2[i] = below_f;
                let m = d / below_d;
                mult[i] = m;
                d = e - m * below_e;
                e = -m * below_f;
            } else {
                let piv = if d.abs() < eps { eps } else { d };
                u0[i] = piv;
                u1[i] = e;
                u2[i] = 0.0;
                let m = below_d / piv;
                mult[i] = m;
                d = below_e - m * e;
                e = below_f;
            }
        }
        Self {
            u0,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.mult[i] * y[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

impl CyclicTridiagonal {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.band.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.band.diag[i];
        }
        for (i, &b) in self.band.off.iter().enumerate() {
            m[(i, i + 1)] = b;
            m[(i + 1, i)] = b;
        }
        if n > 2 {
            m[(0, n - 1)] += self.corner;
            m[(n - 1, 0)] += self.corner;
        }
        m
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let (lo, hi) = self.band.gershgorin();
        (lo - self.corner.abs(), hi + self.corner.abs())
    }

    /// Eigenvalues strictly below `x`: negative pivots of the unpivoted `LDL^T` of
    /// `M - x I`. Elimination fills only the last column, so this is `O(n)`.
    /// Exactly degenerate pairs lose a little accuracy (about `1e-12 |M|`) because
    /// two pivots cross zero together.
    pub fn count_below(&self, x: f64) -> usize {
        let n = self.band.len();
        if n <= 2 {
            return SymTridiagonal::new(self.band.diag.clone(), self.band.off.clone()).count_below(x);
        }
        let (glo, ghi) = self.gershgorin();
        let tiny = f64::MIN_POSITIVE.sqrt() * glo.abs().max(ghi.abs()).max(1.0);
        let guard = |q: f64| if q.abs() < tiny { -tiny } else { q };
        let b = &self.band.off;
        let mut last = self.band.diag[n - 1] - x;
        let mut d = self.band.diag[0] - x;
        let mut c = self.corner;
        let mut count = 0;
        for i in 0..n - 1 {
            let p = guard(d);
            if p < 0.0 {
                count += 1;
            }
            if i + 2 < n {
                d = self.band.diag[i + 1] - x - b[i] * b[i] / p;
                last -= c * c / p;
                c = -b[i] * c / p;
            } else {
                let e = b[i] + c;
                last -= e * e / p;
            }
        }
        if guard(last) < 0.0 {
            count += 1;
        }
        count
    }

    pub fn lowest(&self, k: usize) -> Result<Vec<f64>> {
        bisect_lowest(|x| self.count_below(x), self.gershgorin(), self.band.len(), k)
    }

    /// All eigenvalues, ascending, by a dense solver.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.to_dense()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

impl MeridianMatrix {
    pub fn len(&self) -> usize {
        match self {
            Self::Tridiagonal(t) => t.len(),
            Self::Cyclic(c) => c.band.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn norm_bound(&self) -> f64 {
        match self {
            Self::Tridiagonal(t) => t.norm_bound(),
            Self::Cyclic(c) => {
                let (lo, hi) = c.gershgorin();
                lo.abs().max(hi.abs())
            }
        }
    }

    pub fn count_below(&self, x: f64) -> usize {
        match self {
            Self::Tridiagonal(t) => t.count_below(x),
            Self::Cyclic(c) => c.count_below(x),
        }
    }
}

/// The `k` lowest eigenvalues of a meridian matrix, ascending.
pub fn eigen_lowest(matrix: &MeridianMatrix, k: usize) -> Result<Vec<f64>> {
    match matrix {
        MeridianMatrix::Tridiagonal(t) => t.lowest(k),
        MeridianMatrix::Cyclic(c) => c.lowest(k),
    }
}

/// Eigenvalues strictly below `x`, ascending.
pub fn eigen_below(matrix: &MeridianMatrix, x: f64) -> Result<Vec<f64>> {
    match matrix {
        MeridianMatrix::Tridiagonal(t) => t.lowest(t.count_below(x)),
        MeridianMatrix::Cyclic(c) => c.lowest(c.count_below(x)),
    }
}
