//! Analytic charts for the built-in surfaces.
//!
//! Every built-in is a surface of revolution written as
//! `(rho(v) cos u, rho(v) sin u, z(v))` with `u` the azimuth (always periodic)
//! and `v` the meridian parameter. The unit normal is
//! `(d_u x d_v) / |d_u x d_v|`, which for a profile reads
//! `(z' cos u, z' sin u, -rho') / sigma` with `sigma = sqrt(rho'^2 + z'^2)`.
//!
//! Orientation per chart:
//! - sphere: `v` runs from the south pole (`v = 0`) to the north pole (`v = pi`); normal outward.
//! - torus: `rho = R + r cos v`, `z = r sin v`; normal outward.
//! - catenoid: `rho = c cosh(v/c)`, `z = v`; normal points away from the axis at the throat.
//! - bilayer-neck: `rho = sqrt(Rb^2 + t^2)`, `z = h t / rho`; normal tends to `-z` on the
//!   upper sheet and `+z` on the lower one.
//! - plane: polar chart `rho = v`, `z = 0`; normal is `-z`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{GeometryError, SurfacePoint};

/// Closed real interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn real_line() -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// What happens at one end of the meridian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeridianEnd {
    /// The profile meets the axis (`rho -> 0`) at a finite parameter.
    Pole,
    /// The meridian runs off to infinity; integrals and spectra need truncation.
    Open,
    /// The meridian closes on itself.
    Periodic,
}

/// Profile values and the first three derivatives with respect to the meridian parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet {
    pub rho: [f64; 4],
    pub z: [f64; 4],
}

impl ProfileJet {
    /// Meridian speed `sigma = |d(rho, z)/dv|`.
    pub fn speed(&self) -> f64 {
        self.rho[1].hypot(self.z[1])
    }
}

/// A user-supplied meridian profile for a surface of revolution.
///
/// Implementations must return exact derivatives up to third order; they feed the
/// curvature formulas directly and are never differenced.
pub trait RevolutionProfile: fmt::Debug + Send + Sync {
    fn jet(&self, v: f64) -> ProfileJet;
    fn meridian_domain(&self) -> Interval;
    fn ends(&self) -> (MeridianEnd, MeridianEnd);
    /// Typical length of the surface, used for regularity thresholds and default truncation.
    fn length_scale(&self) -> f64;
    fn name(&self) -> &str {
        "revolution-custom"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Plane,
    Sphere,
    Catenoid,
    Torus,
    BilayerNeck,
    RevolutionCustom,
}

impl SurfaceKind {
    pub const BUILT_IN: [SurfaceKind; 5] = [
        SurfaceKind::Plane,
        SurfaceKind::Sphere,
        SurfaceKind::Catenoid,
        SurfaceKind::Torus,
        SurfaceKind::BilayerNeck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurfaceKind::Plane => "plane",
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Catenoid => "catenoid",
            SurfaceKind::Torus => "torus",
            SurfaceKind::BilayerNeck => "bilayer-neck",
            SurfaceKind::RevolutionCustom => "revolution-custom",
        }
    }

    /// Parameter names accepted by the chart constructor, in order.
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            SurfaceKind::Plane | SurfaceKind::RevolutionCustom => &[],
            SurfaceKind::Sphere => &["a"],
            SurfaceKind::Catenoid => &["c"],
            SurfaceKind::Torus => &["R", "r"],
            SurfaceKind::BilayerNeck => &["Rb", "h"],
        }
    }

    /// Euler characteristic of the closed surface, when there is one.
    pub fn euler_characteristic(self) -> Option<i32> {
        match self {
            SurfaceKind::Sphere => Some(2),
            SurfaceKind::Torus => Some(0),
            _ => None,
        }
    }
}

impl fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SurfaceKind {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plane" => Ok(SurfaceKind::Plane),
            "sphere" => Ok(SurfaceKind::Sphere),
            "catenoid" => Ok(SurfaceKind::Catenoid),
            "torus" => Ok(SurfaceKind::Torus),
            "bilayer-neck" | "bilayer" => Ok(SurfaceKind::BilayerNeck),
            "revolution-custom" => Ok(SurfaceKind::RevolutionCustom),
            other => Err(GeometryError::UnknownSurface(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Plane,
    Sphere { radius: f64 },
    Catenoid { throat: f64 },
    Torus { major: f64, minor: f64 },
    BilayerNeck { neck: f64, half_separation: f64 },
    Custom(Arc<dyn RevolutionProfile>),
}

/// An analytic parametrization `(u, v) -> R^3` of one of the supported surfaces.
#[derive(Debug, Clone)]
pub struct SurfaceChart {
    shape: Shape,
    u_domain: Interval,
    v_domain: Interval,
    periodic_u: bool,
    periodic_v: bool,
}

fn positive(name: &'static str, value: f64) -> Result<f64, GeometryError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GeometryError::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

impl SurfaceChart {
    fn revolution(shape: Shape, v_domain: Interval, periodic_v: bool) -> Self {
        Self {
            shape,
            u_domain: Interval::new(0.0, TAU),
            v_domain,
            periodic_u: true,
            periodic_v,
        }
    }

    /// Flat plane in polar form, `v` the distance from the origin.
    pub fn plane() -> Self {
        Self::revolution(Shape::Plane, Interval::new(0.0, f64::INFINITY), false)
    }

    pub fn sphere(radius: f64) -> Result<Self, GeometryError> {
        let radius = positive("a", radius)?;
        Ok(Self::revolution(
            Shape::Sphere { radius },
            Interval::new(0.0, PI),
            false,
        ))
    }

    pub fn catenoid(throat: f64) -> Result<Self, GeometryError> {
        let throat = positive("c", throat)?;
        Ok(Self::revolution(
            Shape::Catenoid { throat },
            Interval::real_line(),
            false,
        ))
    }

    pub fn torus(major: f64, minor: f64) -> Result<Self, GeometryError> {
        let major = positive("R", major)?;
        let minor = positive("r", minor)?;
        if major <= minor {
            return Err(GeometryError::InvalidParameter {
                name: "R",
                value: major,
                reason: "torus requires R > r",
            });
        }
        Ok(Self::revolution(
            Shape::Torus { major, minor },
            Interval::new(0.0, TAU),
            true,
        ))
    }

    pub fn bilayer_neck(neck: f64, half_separation: f64) -> Result<Self, GeometryError> {
        let neck = positive("Rb", neck)?;
        let half_separation = positive("h", half_separation)?;
        Ok(Self::revolution(
            Shape::BilayerNeck {
                neck,
                half_separation,
            },
            Interval::real_line(),
            false,
        ))
    }

    pub fn custom(profile: Arc<dyn RevolutionProfile>) -> Result<Self, GeometryError> {
        positive("length_scale", profile.length_scale())?;
        let domain = profile.meridian_domain();
        let periodic = matches!(profile.ends(), (MeridianEnd::Periodic, _));
        if periodic && (domain.length() - TAU).abs() > 1e-12 {
            return Err(GeometryError::InvalidParameter {
                name: "meridian_domain",
                value: domain.length(),
                reason: "periodic directions must have length 2*pi",
            });
        }
        Ok(Self::revolution(Shape::Custom(profile), domain, periodic))
    }

    /// Builds a built-in chart from named parameters (`a`, `c`, `R`, `r`, `Rb`, `h`).
    pub fn from_params(
        kind: SurfaceKind,
        lookup: impl Fn(&str) -> Option<f64>,
    ) -> Result<Self, GeometryError> {
        let get = |name: &'static str| {
            lookup(name).ok_or(GeometryError::MissingParameter { kind, name })
        };
        match kind {
            SurfaceKind::Plane => Ok(Self::plane()),
            SurfaceKind::Sphere => Self::sphere(get("a")?),
            SurfaceKind::Catenoid => Self::catenoid(get("c")?),
            SurfaceKind::Torus => Self::torus(get("R")?, get("r")?),
            SurfaceKind::BilayerNeck => Self::bilayer_neck(get("Rb")?, get("h")?),
            SurfaceKind::RevolutionCustom => Err(GeometryError::UnknownSurface(
                "revolution-custom charts are built from a profile, not parameters".into(),
            )),
        }
    }

    pub fn kind(&self) -> SurfaceKind {
        match self.shape {
            Shape::Plane => SurfaceKind::Plane,
            Shape::Sphere { .. } => SurfaceKind::Sphere,
            Shape::Catenoid { .. } => SurfaceKind::Catenoid,
            Shape::Torus { .. } => SurfaceKind::Torus,
            Shape::BilayerNeck { .. } => SurfaceKind::BilayerNeck,
            Shape::Custom(_) => SurfaceKind::RevolutionCustom,
        }
    }

    pub fn name(&self) -> &str {
        match &self.shape {
            Shape::Custom(p) => p.name(),
            _ => self.kind().name(),
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self.shape {
            Shape::Plane | Shape::Custom(_) => Vec::new(),
            Shape::Sphere { radius } => vec![("a", radius)],
            Shape::Catenoid { throat } => vec![("c", throat)],
            Shape::Torus { major, minor } => vec![("R", major), ("r", minor)],
            Shape::BilayerNeck {
                neck,
                half_separation,
            } => vec![("Rb", neck), ("h", half_separation)],
        }
    }

    pub fn u_domain(&self) -> Interval {
        self.u_domain
    }

    pub fn v_domain(&self) -> Interval {
        self.v_domain
    }

    pub fn periodic_u(&self) -> bool {
        self.periodic_u
    }

    pub fn periodic_v(&self) -> bool {
        self.periodic_v
    }

    pub fn euler_characteristic(&self) -> Option<i32> {
        self.kind().euler_characteristic()
    }

    /// Length that sets the curvature scale of the chart.
    pub fn length_scale(&self) -> f64 {
        match &self.shape {
            Shape::Plane => 1.0,
            Shape::Sphere { radius } => *radius,
            Shape::Catenoid { throat } => *throat,
            Shape::Torus { minor, .. } => *minor,
            Shape::BilayerNeck { neck, .. } => *neck,
            Shape::Custom(p) => p.length_scale(),
        }
    }

    pub fn meridian_ends(&self) -> (MeridianEnd, MeridianEnd) {
        match &self.shape {
            Shape::Plane => (MeridianEnd::Pole, MeridianEnd::Open),
            Shape::Sphere { .. } => (MeridianEnd::Pole, MeridianEnd::Pole),
            Shape::Catenoid { .. } | Shape::BilayerNeck { .. } => {
                (MeridianEnd::Open, MeridianEnd::Open)
            }
            Shape::Torus { .. } => (MeridianEnd::Periodic, MeridianEnd::Periodic),
            Shape::Custom(p) => p.ends(),
        }
    }

    /// Compact surfaces need no truncation.
    pub fn is_compact(&self) -> bool {
        let (lo, hi) = self.meridian_ends();
        lo != MeridianEnd::Open && hi != MeridianEnd::Open
    }

    /// The meridian parameter where the surface is closest to the axis in the
    /// asymptotic sense: the throat or neck for open surfaces.
    pub fn meridian_center(&self) -> f64 {
        let d = self.v_domain;
        match (d.lo.is_finite(), d.hi.is_finite()) {
            (true, true) => 0.5 * (d.lo + d.hi),
            (true, false) => d.lo,
            (false, true) => d.hi,
            (false, false) => 0.0,
        }
    }

    /// Profile jet at meridian parameter `v` (already reduced into the domain).
    pub fn profile(&self, v: f64) -> ProfileJet {
        match &self.shape {
            Shape::Plane => ProfileJet {
                rho: [v, 1.0, 0.0, 0.0],
                z: [0.0; 4],
            },
            Shape::Sphere { radius: a } => {
                let (s, c) = v.sin_cos();
                ProfileJet {
                    rho: [a * s, a * c, -a * s, -a * c],
                    z: [-a * c, a * s, a * c, -a * s],
                }
            }
            Shape::Catenoid { throat: c } => {
                let x = v / c;
                let (sh, ch) = (x.sinh(), x.cosh());
                ProfileJet {
                    rho: [c * ch, sh, ch / c, sh / (c * c)],
                    z: [v, 1.0, 0.0, 0.0],
                }
            }
            Shape::Torus { major, minor: r } => {
                let (s, c) = v.sin_cos();
                ProfileJet {
                    rho: [major + r * c, -r * s, -r * c, r * s],
                    z: [r * s, r * c, -r * s, -r * c],
                }
            }
            Shape::BilayerNeck {
                neck,
                half_separation: h,
            } => {
                let b2 = neck * neck;
                let q = b2 + v * v;
                let rho = q.sqrt();
                let rho3 = rho * q;
                let rho5 = rho3 * q;
                let rho7 = rho5 * q;
                ProfileJet {
                    rho: [rho, v / rho, b2 / rho3, -3.0 * b2 * v / rho5],
                    z: [
                        h * v / rho,
                        h * b2 / rho3,
                        -3.0 * h * b2 * v / rho5,
                        -3.0 * h * b2 * (1.0 / rho5 - 5.0 * v * v / rho7),
                    ],
                }
            }
            Shape::Custom(p) => p.jet(v),
        }
    }

    /// Maps `(u, v)` into the fundamental domain, reducing periodic directions modulo 2*pi.
    pub fn reduce(&self, u: f64, v: f64) -> Result<(f64, f64), GeometryError> {
        if !u.is_finite() || !v.is_finite() {
            return Err(GeometryError::OutOfDomain { u, v });
        }
        let reduce_one = |x: f64, periodic: bool, dom: Interval| {
            if periodic {
                Some(dom.lo + (x - dom.lo).rem_euclid(TAU))
            } else if dom.contains(x) {
                Some(x)
            } else {
                None
            }
        };
        match (
            reduce_one(u, self.periodic_u, self.u_domain),
            reduce_one(v, self.periodic_v, self.v_domain),
        ) {
            (Some(ru), Some(rv)) => Ok((ru, rv)),
            _ => Err(GeometryError::OutOfDomain { u, v }),
        }
    }

    /// Exact position and first/second derivatives at chart point `(u, v)`.
    pub fn evaluate(&self, u: f64, v: f64) -> Result<SurfacePoint, GeometryError> {
        let (u, v) = self.reduce(u, v)?;
        let jet = self.profile(v);
        let (su, cu) = u.sin_cos();
        let [rho, drho, ddrho, _] = jet.rho;
        let [z, dz, ddz, _] = jet.z;
        let point = SurfacePoint {
            u,
            v,
            position: Vector3::new(rho * cu, rho * su, z),
            d_u: Vector3::new(-rho * su, rho * cu, 0.0),
            d_v: Vector3::new(drho * cu, drho * su, dz),
            d_uu: Vector3::new(-rho * cu, -rho * su, 0.0),
            d_uv: Vector3::new(-drho * su, drho * cu, 0.0),
            d_vv: Vector3::new(ddrho * cu, ddrho * su, ddz),
        };
        let scale = self.length_scale();
        if point.d_u.cross(&point.d_v).norm() <= 1e-12 * scale * scale {
            return Err(GeometryError::IrregularPoint { u, v });
        }
        Ok(point)
    }
}
