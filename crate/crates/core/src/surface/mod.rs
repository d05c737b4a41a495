//! Built-in analytic surfaces and their first and second order differential geometry.

mod chart;
mod geometry;

pub use chart::{
    Interval, MeridianEnd, ProfileJet, RevolutionProfile, SurfaceChart, SurfaceKind,
};
pub use geometry::{
    curvatures, normal_laplacian_projection, polar_line_element, sigma_densities,
    CurvatureData, FirstForm, NormalDensities, PolarLineElement, SecondForm, SurfacePoint,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point (u={u}, v={v}) lies outside the chart domain")]
    OutOfDomain { u: f64, v: f64 },
    #[error("irregular point (u={u}, v={v}): d_u x d_v vanishes")]
    IrregularPoint { u: f64, v: f64 },
    #[error("invalid parameter {name}={value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("surface {kind} needs parameter {name}")]
    MissingParameter { kind: SurfaceKind, name: &'static str },
    #[error("unknown surface: {0}")]
    UnknownSurface(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector3;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn all_builtins() -> Vec<SurfaceChart> {
        vec![
            SurfaceChart::sphere(1.3).unwrap(),
            SurfaceChart::catenoid(0.7).unwrap(),
            SurfaceChart::torus(2.0, 1.0).unwrap(),
            SurfaceChart::bilayer_neck(1.0, 1.5).unwrap(),
            SurfaceChart::plane(),
        ]
    }

    #[test]
    fn sphere_equator_point() {
        let s = SurfaceChart::sphere(1.0).unwrap();
        let p = s.evaluate(0.0, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(p.position, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn catenoid_throat_point() {
        let c = SurfaceChart::catenoid(1.0).unwrap();
        let p = c.evaluate(0.0, 0.0).unwrap();
        assert_abs_diff_eq!(p.position, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(p.d_u.norm(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.d_v.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bilayer_waist() {
        let b = SurfaceChart::bilayer_neck(1.0, 1.0).unwrap();
        for u in [0.0, 1.0, 4.0] {
            let p = b.evaluate(u, 0.0).unwrap();
            assert_abs_diff_eq!(p.position.z, 0.0);
            assert_abs_diff_eq!(p.position.xy().norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn periodic_inputs_are_reduced() {
        let t = SurfaceChart::torus(2.0, 1.0).unwrap();
        let a = t.evaluate(0.3, 0.4).unwrap();
        let b = t.evaluate(0.3 + 4.0 * PI, 0.4 - 2.0 * PI).unwrap();
        assert_abs_diff_eq!(a.position, b.position, epsilon = 1e-13);
        assert!((b.u - 0.3).abs() < 1e-13);
    }

    #[test]
    fn domain_and_regularity_errors() {
        let s = SurfaceChart::sphere(1.0).unwrap();
        assert!(matches!(
            s.evaluate(0.0, 4.0),
            Err(GeometryError::OutOfDomain { .. })
        ));
        assert!(matches!(
            s.evaluate(0.0, 0.0),
            Err(GeometryError::IrregularPoint { .. })
        ));
        assert!(matches!(
            s.evaluate(1.0, PI),
            Err(GeometryError::IrregularPoint { .. })
        ));
        let p = SurfaceChart::plane();
        assert!(matches!(
            p.evaluate(0.0, -1.0),
            Err(GeometryError::OutOfDomain { .. })
        ));
        assert!(matches!(
            p.evaluate(0.0, 0.0),
            Err(GeometryError::IrregularPoint { .. })
        ));
        assert!(s.evaluate(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(SurfaceChart::torus(1.0, 1.0).is_err());
        assert!(SurfaceChart::torus(1.0, 2.0).is_err());
        assert!(SurfaceChart::sphere(0.0).is_err());
        assert!(SurfaceChart::catenoid(-1.0).is_err());
        assert!(SurfaceChart::bilayer_neck(1.0, f64::INFINITY).is_err());
        let t = SurfaceChart::from_params(SurfaceKind::Torus, |n| match n {
            "R" => Some(3.0),
            "r" => Some(1.0),
            _ => None,
        })
        .unwrap();
        assert_eq!(t.params(), vec![("R", 3.0), ("r", 1.0)]);
        assert!(matches!(
            SurfaceChart::from_params(SurfaceKind::Catenoid, |_| None),
            Err(GeometryError::MissingParameter { name: "c", .. })
        ));
    }

    #[test]
    fn sphere_is_umbilic() {
        let s = SurfaceChart::sphere(1.0).unwrap();
        for (u, v) in [(0.1, 0.3), (2.0, 1.5), (5.0, 2.9)] {
            let c = curvatures(&s.evaluate(u, v).unwrap()).unwrap();
            assert_abs_diff_eq!(c.kappa1, c.kappa2, epsilon = 1e-12);
            assert_abs_diff_eq!(c.mean * c.mean - c.gauss, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.gauss.abs(), 1.0, epsilon = 1e-12);
            // outward normal
            let p = s.evaluate(u, v).unwrap();
            assert_abs_diff_eq!(c.normal, p.position, epsilon = 1e-12);
        }
    }

    #[test]
    fn catenoid_neck_curvatures() {
        let c = SurfaceChart::catenoid(1.0).unwrap();
        let k = curvatures(&c.evaluate(0.7, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(k.kappa1, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.kappa2, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.mean, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.gauss, -1.0, epsilon = 1e-14);
        // closed form away from the neck: K = -sech^4(v/c)/c^2
        let cc = 1.7;
        let c = SurfaceChart::catenoid(cc).unwrap();
        for v in [-3.0, -0.4, 1.1, 2.5] {
            let k = curvatures(&c.evaluate(0.2, v).unwrap()).unwrap();
            let sech = 1.0 / (v / cc).cosh();
            assert_abs_diff_eq!(k.gauss, -sech.powi(4) / (cc * cc), epsilon = 1e-14);
            assert_abs_diff_eq!(k.mean, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn torus_outer_equator() {
        // Outward normal with II = n . x_ij gives negative curvatures on convex parts.
        let t = SurfaceChart::torus(2.0, 1.0).unwrap();
        let k = curvatures(&t.evaluate(0.0, 0.0).unwrap()).unwrap();
        assert_abs_diff_eq!(k.kappa1, -1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.kappa2, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.mean.abs(), 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.gauss, 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(k.normal, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-14);
        // K = cos v / (r (R + r cos v))
        for v in [0.4, 1.9, PI, 4.4] {
            let k = curvatures(&t.evaluate(1.0, v).unwrap()).unwrap();
            assert_abs_diff_eq!(k.gauss, v.cos() / (2.0 + v.cos()), epsilon = 1e-14);
        }
    }

    #[test]
    fn orientation_reversal() {
        for chart in all_builtins() {
            let p = chart.evaluate(0.4, chart.meridian_center() + 0.3).unwrap();
            let k = curvatures(&p).unwrap();
            let flipped = curvatures(&p.swapped()).unwrap();
            let expected = k.reversed();
            assert_abs_diff_eq!(flipped.gauss, k.gauss, epsilon = 1e-13);
            assert_abs_diff_eq!(flipped.mean, expected.mean, epsilon = 1e-13);
            assert_abs_diff_eq!(flipped.kappa1, expected.kappa1, epsilon = 1e-13);
            assert_abs_diff_eq!(flipped.normal, expected.normal, epsilon = 1e-13);
        }
    }

    #[test]
    fn sigma_density_examples() {
        let s = SurfaceChart::sphere(1.0).unwrap();
        let p = s.evaluate(1.0, 1.0).unwrap();
        let d = sigma_densities(&p, &curvatures(&p).unwrap()).unwrap();
        assert_abs_diff_eq!(d.grad_n_sq, 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(d.div_n * d.div_n, 4.0, epsilon = 1e-13);
        assert_abs_diff_eq!(d.curvature_grad_n_sq, 2.0, epsilon = 1e-13);
        // outward normal of the unit sphere has surface divergence +2
        assert_abs_diff_eq!(d.div_n, 2.0, epsilon = 1e-13);

        let c = SurfaceChart::catenoid(1.0).unwrap();
        let p = c.evaluate(0.0, 0.0).unwrap();
        let d = sigma_densities(&p, &curvatures(&p).unwrap()).unwrap();
        assert_abs_diff_eq!(d.div_n, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.grad_n_sq, 2.0, epsilon = 1e-14);

        let pl = SurfaceChart::plane();
        let p = pl.evaluate(0.3, 2.0).unwrap();
        let d = sigma_densities(&p, &curvatures(&p).unwrap()).unwrap();
        assert_eq!(d.grad_n_sq, 0.0);
        assert_eq!(d.div_n, 0.0);
    }

    #[test]
    fn normal_laplacian_matches_identity() {
        for chart in all_builtins() {
            for (u, dv) in [(0.1, 0.2), (3.0, -0.9), (5.5, 1.3)] {
                let v = chart.meridian_center() + dv;
                let Ok(p) = chart.evaluate(u, v) else { continue };
                let d = sigma_densities(&p, &curvatures(&p).unwrap()).unwrap();
                let direct = normal_laplacian_projection(&chart, u, v).unwrap();
                assert_abs_diff_eq!(direct, d.n_lap_n, epsilon = 1e-12);
            }
        }
    }

    /// Central-difference oracle for first and second derivatives.
    fn fd_error(chart: &SurfaceChart, u: f64, v: f64, h: f64) -> f64 {
        let x = |a: f64, b: f64| chart.evaluate(a, b).unwrap().position;
        let p = chart.evaluate(u, v).unwrap();
        let du = (x(u + h, v) - x(u - h, v)) / (2.0 * h);
        let dv = (x(u, v + h) - x(u, v - h)) / (2.0 * h);
        let duu = (x(u + h, v) - 2.0 * x(u, v) + x(u - h, v)) / (h * h);
        let dvv = (x(u, v + h) - 2.0 * x(u, v) + x(u, v - h)) / (h * h);
        let duv = (x(u + h, v + h) - x(u + h, v - h) - x(u - h, v + h) + x(u - h, v - h))
            / (4.0 * h * h);
        [
            (du - p.d_u).norm(),
            (dv - p.d_v).norm(),
            (duu - p.d_uu).norm(),
            (dvv - p.d_vv).norm(),
            (duv - p.d_uv).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        for chart in all_builtins() {
            let (u, v) = (0.8, chart.meridian_center() + 0.45);
            let steps = [2e-2, 1e-2, 5e-3];
            let errs: Vec<f64> = steps.iter().map(|&h| fd_error(&chart, u, v, h)).collect();
            for w in errs.windows(2) {
                if w[0] < 1e-12 {
                    continue; // exact for polynomial-in-v charts
                }
                let order = (w[0] / w[1]).log2();
                assert!(order >= 1.9, "{}: order {order}", chart.name());
            }
        }
    }

    #[test]
    fn catenoid_polar_metric_tends_to_plane() {
        let c = 1.3;
        let chart = SurfaceChart::catenoid(c).unwrap();
        for ratio in [10.0, 100.0] {
            let r: f64 = ratio * c;
            let v = c * (r / c).acosh();
            let le = polar_line_element(&chart, v).unwrap();
            assert_abs_diff_eq!(le.radius, r, epsilon = 1e-12 * r);
            let closed = r * r / (r * r - c * c);
            assert_abs_diff_eq!(le.g_rr, closed, epsilon = 1e-10);
            assert!((le.g_rr - 1.0).abs() < 2.0 * c * c / (r * r));
            assert!((le.g_phiphi / (r * r) - 1.0).abs() < 1e-12);
        }
    }
}
