//! Second-order finite differences for the meridian operators.

use super::eigen::{CyclicTridiagonal, MeridianMatrix, SymTridiagonal};
use super::meridian::{Boundary, FlatSystem, MeridianDomain, MeridianGrid, WeightedSystem};
use crate::{Error, Result};

/// Points required across the half-depth width of the deepest well.
pub const MIN_WELL_POINTS: usize = 16;

/// A discretized meridian operator.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub grid: MeridianGrid,
    pub matrix: MeridianMatrix,
    /// Effective potential at the nodes (`U_l`, or `V + k l^2/rho^2`).
    pub effective: Vec<f64>,
}

fn validate(domain: &MeridianDomain, n: usize) -> Result<()> {
    if n < 8 {
        return Err(Error::SpectralResolution(format!("{n} meridian points is below the minimum of 8")));
    }
    let periodic = |b| b == Boundary::Periodic;
    if periodic(domain.left) != periodic(domain.right) {
        return Err(Error::SpectralResolution("mixed periodic and non-periodic ends".into()));
    }
    if !(domain.hi > domain.lo) || !domain.hi.is_finite() || !domain.lo.is_finite() {
        return Err(Error::InvalidTruncation(domain.hi - domain.lo));
    }
    Ok(())
}

/// Rejects steps that resolve the deepest well with fewer than [`MIN_WELL_POINTS`].
fn check_well(grid: &MeridianGrid, effective: &[f64], kinetic: f64) -> Result<()> {
    let Some((imin, &umin)) = effective
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
    else {
        return Ok(());
    };
    // wells at rounding level (umbilic surfaces) need no resolution
    if !(umin < -1e-12 * kinetic / (grid.step * grid.step)) {
        return Ok(());
    }
    let inside = |i: usize| effective[i] <= 0.5 * umin;
    let n = effective.len();
    let periodic = grid.domain.left == Boundary::Periodic;
    let mut count = 1;
    let mut j = imin;
    loop {
        j = if j + 1 < n {
            j + 1
        } else if periodic {
            0
        } else {
            break;
        };
        if j == imin || !inside(j) {
            break;
        }
        count += 1;
    }
    let mut j = imin;
    while count < n {
        j = if j > 0 {
            j - 1
        } else if periodic {
            n - 1
        } else {
            break;
        };
        if !inside(j) {
            break;
        }
        count += 1;
    }
    if count < MIN_WELL_POINTS {
        return Err(Error::StepTooCoarse {
            step: grid.step,
            points: count,
            required: MIN_WELL_POINTS,
        });
    }
    Ok(())
}

fn assemble(grid: MeridianGrid, kinetic: f64, diag: Vec<f64>, off: Vec<f64>, corner: f64, effective: Vec<f64>) -> Result<DiscreteOperator> {
    if let Some(i) = diag.iter().chain(&off).position(|x| !x.is_finite()) {
        let s = grid.nodes[i.min(grid.len() - 1)];
        return Err(Error::NonFinitePotential { s });
    }
    check_well(&grid, &effective, kinetic)?;
    let band = SymTridiagonal::new(diag, off);
    let matrix = if grid.domain.left == Boundary::Periodic {
        MeridianMatrix::Cyclic(CyclicTridiagonal { band, corner })
    } else {
        MeridianMatrix::Tridiagonal(band)
    };
    Ok(DiscreteOperator {
        grid,
        matrix,
        effective,
    })
}

/// Three-point discretization of `-k d^2/ds^2 + U` with `n` nominal points.
pub fn discretize_1d(system: &FlatSystem, n: usize) -> Result<DiscreteOperator> {
    validate(&system.domain, n)?;
    if system.domain.left == Boundary::Pole || system.domain.right == Boundary::Pole {
        return Err(Error::SpectralResolution(
            "the flat form is singular at a pole; use the weighted form".into(),
        ));
    }
    let grid = MeridianGrid::new(system.domain, n);
    let h2 = grid.step * grid.step;
    let k = system.kinetic;
    let effective: Vec<f64> = grid.nodes.iter().map(|&s| (system.potential)(s)).collect();
    let diag = effective.iter().map(|u| 2.0 * k / h2 + u).collect();
    let off = vec![-k / h2; grid.len() - 1];
    assemble(grid, k, diag, off, -k / h2, effective)
}

/// Conservative discretization of `-k (1/rho)(rho f')' + k l^2/rho^2 f + V f`,
/// symmetrized by `sqrt(rho)` so the matrix acts on `sqrt(rho) f`. A pole face
/// carries zero flux.
pub fn discretize_weighted(system: &WeightedSystem, n: usize) -> Result<DiscreteOperator> {
    validate(&system.domain, n)?;
    let grid = MeridianGrid::new(system.domain, n);
    let h = grid.step;
    let h2 = h * h;
    let k = system.kinetic;
    let m = grid.len();
    let rho: Vec<f64> = grid.nodes.iter().map(|&s| (system.radius)(s)).collect();
    let face = |s: f64| (system.radius)(s);
    let periodic = system.domain.left == Boundary::Periodic;
    // faces[j] sits between node j and node j+1; the last one wraps when periodic
    let faces: Vec<f64> = (0..m).map(|j| face(grid.nodes[j] + 0.5 * h)).collect();
    let left_face = match system.domain.left {
        Boundary::Pole => 0.0,
        Boundary::Dirichlet => face(grid.nodes[0] - 0.5 * h),
        Boundary::Periodic => faces[m - 1],
    };
    let right_face = match system.domain.right {
        Boundary::Pole => 0.0,
        _ => faces[m - 1],
    };
    let l2 = f64::from(system.ell * system.ell);
    let mut effective = Vec::with_capacity(m);
    let mut diag = Vec::with_capacity(m);
    for j in 0..m {
        let before = if j == 0 { left_face } else { faces[j - 1] };
        let after = if j + 1 == m { right_face } else { faces[j] };
        let u = (system.potential)(grid.nodes[j]) + k * l2 / (rho[j] * rho[j]);
        effective.push(u);
        diag.push(k * (before + after) / (rho[j] * h2) + u);
    }
    let off = (0..m - 1)
        .map(|j| -k * faces[j] / (h2 * (rho[j] * rho[j + 1]).sqrt()))
        .collect();
    let corner = if periodic {
        -k * faces[m - 1] / (h2 * (rho[m - 1] * rho[0]).sqrt())
    } else {
        0.0
    };
    assemble(grid, k, diag, off, corner, effective)
}

#[cfg(test)]
mod tests {
    use super::super::eigen::eigen_lowest;
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn dirichlet(t: f64) -> MeridianDomain {
        MeridianDomain {
            lo: -t,
            hi: t,
            left: Boundary::Dirichlet,
            right: Boundary::Dirichlet,
        }
    }

    #[test]
    fn free_box_ground_state() {
        let sys = FlatSystem {
            kinetic: 1.0,
            domain: dirichlet(10.0),
            potential: Arc::new(|_| 0.0),
        };
        let err = |n| {
            let op = discretize_1d(&sys, n).unwrap();
            eigen_lowest(&op.matrix, 1).unwrap()[0] - (PI / 20.0).powi(2)
        };
        assert!(err(2048).abs() < 1e-4 * (PI / 20.0).powi(2));
        let order = (err(256) / err(512)).log2();
        assert!(order > 1.9, "{order}");
    }

    #[test]
    fn harmonic_well_levels() {
        // -f'' + s^2 f: levels 1, 3, 5, ...
        let sys = FlatSystem {
            kinetic: 1.0,
            domain: dirichlet(10.0),
            potential: Arc::new(|s| s * s),
        };
        let op = discretize_1d(&sys, 2000).unwrap();
        for (k, e) in eigen_lowest(&op.matrix, 4).unwrap().into_iter().enumerate() {
            assert_abs_diff_eq!(e, (2 * k + 1) as f64, epsilon = 1e-3);
        }
    }

    #[test]
    fn coarse_step_is_rejected() {
        let sys = FlatSystem {
            kinetic: 1.0,
            domain: dirichlet(40.0),
            potential: Arc::new(|s| -1.0 / (1.0 + 100.0 * s * s)),
        };
        assert!(matches!(discretize_1d(&sys, 256), Err(Error::StepTooCoarse { .. })));
        assert!(discretize_1d(&sys, 8192).is_ok());
    }

    #[test]
    fn flat_disk_bessel_zero() {
        // unit disk, l = 0: k = j_{0,1}
        let sys = WeightedSystem {
            kinetic: 1.0,
            domain: MeridianDomain {
                lo: 0.0,
                hi: 1.0,
                left: Boundary::Pole,
                right: Boundary::Dirichlet,
            },
            ell: 0,
            radius: Arc::new(|s| s),
            potential: Arc::new(|_| 0.0),
        };
        let j01: f64 = 2.404_825_557_695_773;
        let e = eigen_lowest(&discretize_weighted(&sys, 1024).unwrap().matrix, 1).unwrap()[0];
        assert_abs_diff_eq!(e, j01 * j01, epsilon = 1e-4);
        let sys1 = WeightedSystem { ell: 1, ..sys };
        let j11: f64 = 3.831_705_970_207_512;
        let e = eigen_lowest(&discretize_weighted(&sys1, 1024).unwrap().matrix, 1).unwrap()[0];
        assert_abs_diff_eq!(e, j11 * j11, epsilon = 1e-3);
    }
}
