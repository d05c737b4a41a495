//! Pointwise differential geometry: fundamental forms, principal curvatures and
//! the normal-field densities of the sigma-model form.

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use super::{GeometryError, SurfaceChart};

/// Position and exact derivatives of a chart at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub u: f64,
    pub v: f64,
    pub position: Vector3<f64>,
    pub d_u: Vector3<f64>,
    pub d_v: Vector3<f64>,
    pub d_uu: Vector3<f64>,
    pub d_uv: Vector3<f64>,
    pub d_vv: Vector3<f64>,
}

impl SurfacePoint {
    /// The same point seen through the chart with `u` and `v` exchanged.
    /// Exchanging the coordinates reverses the induced normal.
    pub fn swapped(&self) -> Self {
        Self {
            u: self.v,
            v: self.u,
            position: self.position,
            d_u: self.d_v,
            d_v: self.d_u,
            d_uu: self.d_vv,
            d_uv: self.d_uv,
            d_vv: self.d_uu,
        }
    }

    fn frame(&self) -> Result<(Vector3<f64>, f64), GeometryError> {
        let cross = self.d_u.cross(&self.d_v);
        let area = cross.norm();
        let scale = self.d_u.norm() * self.d_v.norm();
        if !(area > 1e-14 * scale) || !area.is_finite() {
            return Err(GeometryError::IrregularPoint {
                u: self.u,
                v: self.v,
            });
        }
        Ok((cross / area, area))
    }
}

/// First fundamental form `(E, F, G)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstForm {
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl FirstForm {
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    /// Inverse metric `g^{ij}` as `(g^uu, g^uv, g^vv)`.
    pub fn inverse(&self) -> (f64, f64, f64) {
        let det = self.det();
        (self.g / det, -self.f / det, self.e / det)
    }
}

/// Second fundamental form `b_ij = n . x_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondForm {
    pub b11: f64,
    pub b12: f64,
    pub b22: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureData {
    /// Larger principal curvature.
    pub kappa1: f64,
    pub kappa2: f64,
    /// Mean curvature `(kappa1 + kappa2) / 2`.
    pub mean: f64,
    /// Gauss curvature `kappa1 * kappa2`.
    pub gauss: f64,
    pub normal: Vector3<f64>,
    pub sqrt_g: f64,
    pub first: FirstForm,
    pub second: SecondForm,
    split_sq: f64,
}

impl CurvatureData {
    /// `(kappa1 - kappa2)^2`, computed from the shape operator entries rather than
    /// from `H^2 - K`, so it vanishes to rounding squared at umbilics.
    pub fn principal_split_sq(&self) -> f64 {
        self.split_sq
    }

    /// Curvatures seen with the opposite normal.
    pub fn reversed(&self) -> Self {
        Self {
            kappa1: -self.kappa2,
            kappa2: -self.kappa1,
            mean: -self.mean,
            gauss: self.gauss,
            normal: -self.normal,
            sqrt_g: self.sqrt_g,
            first: self.first,
            second: SecondForm {
                b11: -self.second.b11,
                b12: -self.second.b12,
                b22: -self.second.b22,
            },
            split_sq: self.split_sq,
        }
    }
}

/// Principal curvatures as eigenvalues of the shape operator `I^{-1} II`.
pub fn curvatures(point: &SurfacePoint) -> Result<CurvatureData, GeometryError> {
    let (normal, sqrt_g) = point.frame()?;
    let first = FirstForm {
        e: point.d_u.dot(&point.d_u),
        f: point.d_u.dot(&point.d_v),
        g: point.d_v.dot(&point.d_v),
    };
    let second = SecondForm {
        b11: normal.dot(&point.d_uu),
        b12: normal.dot(&point.d_uv),
        b22: normal.dot(&point.d_vv),
    };
    let metric = Matrix2::new(first.e, first.f, first.f, first.g);
    let inv = metric
        .try_inverse()
        .ok_or(GeometryError::IrregularPoint {
            u: point.u,
            v: point.v,
        })?;
    let bmat = Matrix2::new(second.b11, second.b12, second.b12, second.b22);
    let shape = inv * bmat;

    let mean = 0.5 * shape.trace();
    let gauss = (second.b11 * second.b22 - second.b12 * second.b12) / first.det();
    let diff = shape[(0, 0)] - shape[(1, 1)];
    let split_sq = (diff * diff + 4.0 * shape[(0, 1)] * shape[(1, 0)]).max(0.0);
    let half_split = 0.5 * split_sq.sqrt();

    Ok(CurvatureData {
        kappa1: mean + half_split,
        kappa2: mean - half_split,
        mean,
        gauss,
        normal,
        sqrt_g,
        first,
        second,
        split_sq,
    })
}

/// Normal-field quantities entering the sigma-model form of the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalDensities {
    /// `(grad n)^2 = g^{ij} d_i n . d_j n`.
    pub grad_n_sq: f64,
    /// Surface divergence `g^{ij} d_i n . d_j x`.
    pub div_n: f64,
    /// `n . Lap_s n`, via `n . Lap_s n = -(grad n)^2` (unit length of `n`).
    pub n_lap_n: f64,
    /// Gauss-map area density `n . (d_u n x d_v n)` per unit `du dv`.
    pub degree_density: f64,
    /// `4 H^2 - 2 K`, the curvature value `(grad n)^2` must match.
    pub curvature_grad_n_sq: f64,
    /// `-2 H`, the curvature value `div n` must match.
    pub curvature_div_n: f64,
}

fn normal_derivatives(
    point: &SurfacePoint,
    normal: &Vector3<f64>,
    area: f64,
) -> (Vector3<f64>, Vector3<f64>) {
    let nu_raw = point.d_uu.cross(&point.d_v) + point.d_u.cross(&point.d_uv);
    let nv_raw = point.d_uv.cross(&point.d_v) + point.d_u.cross(&point.d_vv);
    let project = |w: Vector3<f64>| (w - normal * normal.dot(&w)) / area;
    (project(nu_raw), project(nv_raw))
}

/// Evaluates the normal-field densities from analytic derivatives of the unit normal.
pub fn sigma_densities(
    point: &SurfacePoint,
    curv: &CurvatureData,
) -> Result<NormalDensities, GeometryError> {
    let (normal, area) = point.frame()?;
    let (n_u, n_v) = normal_derivatives(point, &normal, area);
    let (guu, guv, gvv) = curv.first.inverse();

    let grad_n_sq = guu * n_u.dot(&n_u) + 2.0 * guv * n_u.dot(&n_v) + gvv * n_v.dot(&n_v);
    let div_n = guu * n_u.dot(&point.d_u)
        + guv * (n_u.dot(&point.d_v) + n_v.dot(&point.d_u))
        + gvv * n_v.dot(&point.d_v);

    Ok(NormalDensities {
        grad_n_sq,
        div_n,
        n_lap_n: -grad_n_sq,
        degree_density: normal.dot(&n_u.cross(&n_v)),
        curvature_grad_n_sq: 4.0 * curv.mean * curv.mean - 2.0 * curv.gauss,
        curvature_div_n: -2.0 * curv.mean,
    })
}

/// `n . Lap_s n` computed directly from the surface Laplacian of the normal field,
/// using third derivatives of the meridian profile. Independent of [`sigma_densities`].
///
/// With `n = (a cos u, a sin u, b)`, `a = z'/sigma`, `b = -rho'/sigma`, this is
/// `-a^2/rho^2 + (a a'' + b b'')/sigma^2`.
pub fn normal_laplacian_projection(
    chart: &SurfaceChart,
    u: f64,
    v: f64,
) -> Result<f64, GeometryError> {
    let point = chart.evaluate(u, v)?;
    let jet = chart.profile(point.v);
    let [rho, r1, r2, r3] = jet.rho;
    let [_, z1, z2, z3] = jet.z;

    let sigma = jet.speed();
    let s1 = (r1 * r2 + z1 * z2) / sigma;
    let s2 = (r2 * r2 + r1 * r3 + z2 * z2 + z1 * z3 - s1 * s1) / sigma;

    // second derivative of p / sigma given p, p', p''
    let quotient_dd = |p: f64, p1: f64, p2: f64| {
        p2 / sigma - 2.0 * p1 * s1 / (sigma * sigma) - p * s2 / (sigma * sigma)
            + 2.0 * p * s1 * s1 / (sigma * sigma * sigma)
    };
    let a = z1 / sigma;
    let b = -r1 / sigma;
    let a2 = quotient_dd(z1, z2, z3);
    let b2 = quotient_dd(-r1, -r2, -r3);

    Ok(-a * a / (rho * rho) + (a * a2 + b * b2) / (sigma * sigma))
}

/// Line element `ds^2 = g_rr dr^2 + g_phiphi dphi^2` of a surface of revolution in
/// polar form `r = rho(v)`, evaluated at meridian parameter `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarLineElement {
    pub radius: f64,
    pub g_rr: f64,
    pub g_phiphi: f64,
}

pub fn polar_line_element(chart: &SurfaceChart, v: f64) -> Result<PolarLineElement, GeometryError> {
    let point = chart.evaluate(0.0, v)?;
    let jet = chart.profile(point.v);
    let drho = jet.rho[1];
    if drho == 0.0 {
        return Err(GeometryError::IrregularPoint { u: 0.0, v });
    }
    let g = point.d_v.dot(&point.d_v);
    Ok(PolarLineElement {
        radius: jet.rho[0],
        g_rr: g / (drho * drho),
        g_phiphi: point.d_u.dot(&point.d_u),
    })
}
