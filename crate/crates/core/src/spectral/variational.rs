//! Gaussian trial functions: an upper bound on the ground energy that does not
//! depend on any grid.

use serde::{Deserialize, Serialize};

use super::meridian::{reduce_axisymmetric, Boundary};
use super::SpectralProblem;
use crate::quadrature::{NeumaierSum, Rule1d};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationalBound {
    /// Width of the best trial function, in arclength.
    pub width: f64,
    /// Rayleigh quotient at that width; an upper bound on the ground energy.
    pub energy: f64,
    pub widths_scanned: usize,
}

const PANELS: usize = 96;

/// Rayleigh quotient of `psi = exp(-s^2 / (2 w^2))` centred on the throat (`s = 0`):
/// `int (k psi'^2 + V psi^2) rho ds / int psi^2 rho ds` over `|s| <= 10 w`.
pub fn gaussian_rayleigh_quotient(problem: &SpectralProblem, width: f64) -> Result<f64> {
    let (left, right) = {
        let ends = problem.chart.meridian_ends();
        (ends.0, ends.1)
    };
    if (left, right) != (crate::surface::MeridianEnd::Open, crate::surface::MeridianEnd::Open) {
        return Err(Error::SpectralResolution(format!(
            "the Gaussian trial function needs a meridian open at both ends; {} is not",
            problem.chart.name()
        )));
    }
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidTruncation(width));
    }
    let reach = 10.0 * width;
    let mut p = problem.clone();
    p.truncation = Some(reach);
    let red = reduce_axisymmetric(&p, 0)?;
    debug_assert_eq!(red.domain.left, Boundary::Dirichlet);
    let k = red.kinetic;
    let panel = 2.0 * reach / PANELS as f64;
    let mut num = NeumaierSum::default();
    let mut den = NeumaierSum::default();
    for j in 0..PANELS {
        let a = -reach + j as f64 * panel;
        let rule = Rule1d::gauss_legendre(8, a, a + panel);
        for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
            let m = red.sample(s);
            let psi = (-0.5 * s * s / (width * width)).exp();
            let dpsi = -s / (width * width) * psi;
            num.add(w * (k * dpsi * dpsi + m.potential * psi * psi) * m.rho);
            den.add(w * psi * psi * m.rho);
        }
    }
    Ok(num.total() / den.total())
}

/// Minimizes the Gaussian Rayleigh quotient over the width: a log-spaced scan from
/// `0.05 L` to `50 L` followed by golden-section refinement.
pub fn variational_ground_bound(problem: &SpectralProblem) -> Result<VariationalBound> {
    let l = problem.chart.length_scale();
    let scan = 61;
    let widths: Vec<f64> = (0..scan)
        .map(|i| l * 0.05 * 1000f64.powf(i as f64 / (scan - 1) as f64))
        .collect();
    let values: Vec<f64> = widths
        .iter()
        .map(|&w| gaussian_rayleigh_quotient(problem, w))
        .collect::<Result<_>>()?;
    let best = (0..scan).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    let (mut a, mut b) = (
        widths[best.saturating_sub(1)].ln(),
        widths[(best + 1).min(scan - 1)].ln(),
    );
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |x: f64| gaussian_rayleigh_quotient(problem, x.exp());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..40 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let (x, fx) = if fc < fd { (c, fc) } else { (d, fd) };
    let (width, energy) = if fx < values[best] {
        (x.exp(), fx)
    } else {
        (widths[best], values[best])
    };
    Ok(VariationalBound {
        width,
        energy,
        widths_scanned: scan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{count_bound_states, PotentialSelector};
    use crate::surface::SurfaceChart;

    #[test]
    fn flat_cylinder_quotient_closed_form() {
        // rho = const and V = 0: R(w) = k / (2 w^2)
        let problem = SpectralProblem::new(SurfaceChart::catenoid(1.0).unwrap(), PotentialSelector::None);
        let w: f64 = 0.05;
        // near the throat rho is nearly constant for a narrow Gaussian
        let r = gaussian_rayleigh_quotient(&problem, w).unwrap();
        assert!((r - 0.5 / (w * w)).abs() < 1e-2 / (w * w), "{r}");
    }

    #[test]
    fn catenoid_bound_lies_above_discrete_ground() {
        let problem = SpectralProblem::new(SurfaceChart::catenoid(1.0).unwrap(), PotentialSelector::Dacosta)
            .with_truncation(20.0);
        let bound = variational_ground_bound(&problem).unwrap();
        assert!(bound.energy < 0.0);
        let spec = count_bound_states(&problem).unwrap();
        let e0 = spec.convergence.richardson_ground.unwrap();
        assert!(e0 <= bound.energy + 1e-6, "{e0} vs {}", bound.energy);
        assert!(gaussian_rayleigh_quotient(&SpectralProblem::new(SurfaceChart::sphere(1.0).unwrap(), PotentialSelector::Dacosta), 1.0).is_err());
    }
}
