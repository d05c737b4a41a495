//! Meridian arclength, 1D grids and the axisymmetric reduction of the surface
//! Hamiltonian to a single meridian coordinate.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::potential::{evaluate_point, PhysicalUnits};
use crate::quadrature::Rule1d;
use crate::surface::{MeridianEnd, SurfaceChart};
use crate::{Error, Result};

use super::{PotentialSelector, SpectralProblem};

/// Arclength `s(v) = int_{v0}^{v} sigma dv'` along the meridian and its inverse.
///
/// Cumulative arclength is tabulated at panel boundaries; inside a panel it is
/// completed with a 16-point Gauss-Legendre rule, so the map is accurate to rounding.
#[derive(Debug, Clone)]
pub struct ArclengthMap {
    chart: SurfaceChart,
    origin: f64,
    panel: f64,
    rule: Rule1d,
    /// `forward[k] = s(origin + k * panel)`, `backward[k] = s(origin - k * panel)`.
    forward: Vec<f64>,
    backward: Vec<f64>,
}

impl ArclengthMap {
    /// Tabulates the map far enough to cover arclength `reach` on each side of the origin
    /// (or the whole meridian when it is bounded).
    pub fn new(chart: &SurfaceChart, reach: f64) -> Self {
        let dom = chart.v_domain();
        let origin = if dom.lo.is_finite() { dom.lo } else { chart.meridian_center() };
        let panel = chart.length_scale() / 32.0;
        let mut map = Self {
            chart: chart.clone(),
            origin,
            panel,
            rule: Rule1d::gauss_legendre(16, 0.0, 1.0),
            forward: vec![0.0],
            backward: vec![0.0],
        };
        let v_hi = if chart.periodic_v() { dom.lo + TAU } else { dom.hi };
        let reach_to = |limit: f64| if limit.is_finite() { f64::INFINITY } else { reach };
        map.extend(1.0, v_hi, reach_to(v_hi));
        map.extend(-1.0, dom.lo, reach_to(dom.lo));
        map
    }

    fn speed(&self, v: f64) -> f64 {
        self.chart.profile(v).speed()
    }

    fn piece(&self, a: f64, b: f64) -> f64 {
        let w = b - a;
        self.rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .map(|(&x, &wt)| wt * w * self.speed(a + x * w))
            .sum()
    }

    fn extend(&mut self, dir: f64, limit: f64, reach: f64) {
        let table = if dir > 0.0 { &self.forward } else { &self.backward };
        let mut acc = *table.last().unwrap();
        let mut k = table.len() - 1;
        let mut new = Vec::new();
        loop {
            let a = self.origin + dir * k as f64 * self.panel;
            if (limit - a) * dir <= 0.0 || acc.abs() >= reach {
                break;
            }
            let b = if (limit - (a + dir * self.panel)) * dir < 0.0 {
                limit
            } else {
                a + dir * self.panel
            };
            acc += dir * self.piece(a.min(b), a.max(b));
            new.push(acc);
            k += 1;
            if b == limit {
                break;
            }
        }
        if dir > 0.0 {
            self.forward.extend(new);
        } else {
            self.backward.extend(new);
        }
    }

    /// Arclength from the origin to `v` (signed).
    pub fn arclength(&self, v: f64) -> f64 {
        let off = v - self.origin;
        let (table, dir) = if off >= 0.0 {
            (&self.forward, 1.0)
        } else {
            (&self.backward, -1.0)
        };
        let k = ((off.abs() / self.panel).floor() as usize).min(table.len() - 1);
        let a = self.origin + dir * k as f64 * self.panel;
        table[k] + dir * self.piece(a.min(v), a.max(v))
    }

    /// Meridian parameter at arclength `s`.
    pub fn parameter(&self, s: f64) -> f64 {
        let (table, dir) = if s >= 0.0 {
            (&self.forward, 1.0)
        } else {
            (&self.backward, -1.0)
        };
        let k = table
            .partition_point(|&x| x.abs() <= s.abs())
            .saturating_sub(1)
            .min(table.len().saturating_sub(2));
        let mut lo = self.origin + dir * k as f64 * self.panel;
        let mut hi = lo + dir * self.panel;
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        let mut v = if table.len() > k + 1 && table[k + 1] != table[k] {
            let t = (s - table[k]) / (table[k + 1] - table[k]);
            self.origin + dir * (k as f64 + t) * self.panel
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..60 {
            let f = self.arclength(v) - s;
            if f.abs() <= 4.0 * f64::EPSILON * s.abs().max(self.panel) {
                break;
            }
            if f > 0.0 {
                hi = hi.min(v);
            } else {
                lo = lo.max(v);
            }
            let next = v - f / self.speed(v);
            v = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        v
    }

    /// Total arclength between the ends of a bounded or periodic meridian.
    pub fn total_length(&self) -> f64 {
        self.forward.last().unwrap() - self.backward.last().unwrap()
    }
}

/// Boundary treatment at one end of a 1D grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `rho = 0` at the end face: zero flux, nodes start half a cell inside.
    Pole,
    /// Wave function vanishes one cell beyond the last node.
    Dirichlet,
    Periodic,
}

/// An interval with boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeridianDomain {
    pub lo: f64,
    pub hi: f64,
    pub left: Boundary,
    pub right: Boundary,
}

/// Uniform nodes on a [`MeridianDomain`].
#[derive(Debug, Clone, PartialEq)]
pub struct MeridianGrid {
    pub domain: MeridianDomain,
    pub step: f64,
    pub nodes: Vec<f64>,
}

impl MeridianGrid {
    /// Grid with `n` nominal points. Dirichlet-Dirichlet grids use `n` (rounded up to
    /// even) intervals and `n - 1` interior nodes, so `(n, T)` nodes are a subset of
    /// `(2n, 2T)` nodes on a symmetric window.
    pub fn new(domain: MeridianDomain, n: usize) -> Self {
        let len = domain.hi - domain.lo;
        let offset = |b: Boundary| match b {
            Boundary::Pole => 0.5,
            Boundary::Dirichlet => 1.0,
            Boundary::Periodic => 0.0,
        };
        let (count, step) = match (domain.left, domain.right) {
            (Boundary::Periodic, _) | (_, Boundary::Periodic) => (n, len / n as f64),
            (Boundary::Dirichlet, Boundary::Dirichlet) => {
                let m = n + n % 2;
                (m - 1, len / m as f64)
            }
            (l, r) => (n, len / (n as f64 - 1.0 + offset(l) + offset(r))),
        };
        let first = domain.lo + offset(domain.left) * step;
        let nodes = (0..count).map(|j| first + j as f64 * step).collect();
        Self {
            domain,
            step,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `-k d^2/ds^2 + U(s)` with flat measure.
#[derive(Clone)]
pub struct FlatSystem {
    pub kinetic: f64,
    pub domain: MeridianDomain,
    pub potential: ScalarFn,
}

/// `-k (1/rho) d/ds (rho d/ds) + k l^2/rho^2 + V(s)` with measure `rho ds`.
#[derive(Clone)]
pub struct WeightedSystem {
    pub kinetic: f64,
    pub domain: MeridianDomain,
    pub ell: u32,
    pub radius: ScalarFn,
    pub potential: ScalarFn,
}

impl std::fmt::Debug for FlatSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FlatSystem")
            .field("kinetic", &self.kinetic)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl std::fmt::Debug for WeightedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightedSystem")
            .field("kinetic", &self.kinetic)
            .field("domain", &self.domain)
            .field("ell", &self.ell)
            .finish_non_exhaustive()
    }
}

/// Meridian data at one arclength value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeridianSample {
    pub rho: f64,
    pub drho: f64,
    pub d2rho: f64,
    pub potential: f64,
}

/// One angular-momentum channel of an axisymmetric problem.
///
/// With `psi = e^{i l phi} chi(s) / sqrt(rho(s))` the channel operator becomes
/// `-k chi'' + U_l chi` where `U_l = k (l^2/rho^2 + rho''/(2 rho) - rho'^2/(4 rho^2)) + V`.
#[derive(Debug, Clone)]
pub struct AxisymmetricReduction {
    pub ell: u32,
    pub kinetic: f64,
    pub domain: MeridianDomain,
    chart: SurfaceChart,
    map: Arc<ArclengthMap>,
    selector: PotentialSelector,
    units: PhysicalUnits,
}

impl AxisymmetricReduction {
    pub fn sample(&self, s: f64) -> MeridianSample {
        let v = self.map.parameter(s);
        let jet = self.chart.profile(v);
        let sigma = jet.speed();
        let [rho, rv, rvv, _] = jet.rho;
        let [_, zv, zvv, _] = jet.z;
        let sigma_v = (rv * rvv + zv * zvv) / sigma;
        let potential = match self.selector {
            PotentialSelector::None => 0.0,
            sel => match evaluate_point(&self.chart, 0.0, v, &self.units) {
                Ok((_, _, d)) if sel == PotentialSelector::Dacosta => d.v_dacosta,
                Ok((_, _, d)) => d.v_paper8,
                Err(_) => f64::NAN,
            },
        };
        MeridianSample {
            rho,
            drho: rv / sigma,
            d2rho: (rvv * sigma - rv * sigma_v) / (sigma * sigma * sigma),
            potential,
        }
    }

    /// `U_l(s)` in energy units.
    pub fn liouville_potential(&self, s: f64) -> f64 {
        let m = self.sample(s);
        let l2 = f64::from(self.ell * self.ell);
        let q = m.d2rho / (2.0 * m.rho) - m.drho * m.drho / (4.0 * m.rho * m.rho);
        self.kinetic * (l2 / (m.rho * m.rho) + q) + m.potential
    }

    /// The transformed problem; `None` when an end is a pole, where `U_l` is singular.
    pub fn flat_system(&self) -> Option<FlatSystem> {
        if self.domain.left == Boundary::Pole || self.domain.right == Boundary::Pole {
            return None;
        }
        let this = self.clone();
        Some(FlatSystem {
            kinetic: self.kinetic,
            domain: self.domain,
            potential: Arc::new(move |s| this.liouville_potential(s)),
        })
    }

    /// The untransformed problem with measure `rho ds`.
    pub fn weighted_system(&self) -> WeightedSystem {
        let (a, b) = (self.clone(), self.clone());
        WeightedSystem {
            kinetic: self.kinetic,
            domain: self.domain,
            ell: self.ell,
            radius: Arc::new(move |s| a.sample(s).rho),
            potential: Arc::new(move |s| b.sample(s).potential),
        }
    }
}

/// Arclength domain of the meridian for a problem (`T` is an arclength half-width).
pub fn meridian_domain(chart: &SurfaceChart, map: &ArclengthMap, truncation: Option<f64>) -> Result<MeridianDomain> {
    let (left, right) = chart.meridian_ends();
    let need_t = || -> Result<f64> {
        match truncation {
            Some(t) if t.is_finite() && t > 0.0 => Ok(t),
            Some(t) => Err(Error::InvalidTruncation(t)),
            None => Err(Error::MissingTruncation(chart.name().to_owned())),
        }
    };
    let as_boundary = |end: MeridianEnd| match end {
        MeridianEnd::Pole => Boundary::Pole,
        MeridianEnd::Open => Boundary::Dirichlet,
        MeridianEnd::Periodic => Boundary::Periodic,
    };
    let dom = chart.v_domain();
    let lo = match left {
        MeridianEnd::Open => -need_t()?,
        _ => map.arclength(dom.lo),
    };
    let hi = match right {
        MeridianEnd::Open => need_t()?,
        MeridianEnd::Periodic => map.total_length(),
        MeridianEnd::Pole => map.arclength(dom.hi),
    };
    // a pole-to-infinity meridian starts at the pole; its window is [0, T]
    let hi = if left == MeridianEnd::Pole && right == MeridianEnd::Open {
        lo + need_t()?
    } else {
        hi
    };
    Ok(MeridianDomain {
        lo,
        hi,
        left: as_boundary(left),
        right: as_boundary(right),
    })
}

/// Reduces the surface Hamiltonian to angular-momentum channel `ell`.
pub fn reduce_axisymmetric(problem: &SpectralProblem, ell: u32) -> Result<AxisymmetricReduction> {
    let chart = &problem.chart;
    if !chart.periodic_u() {
        return Err(Error::NotAxisymmetric(chart.name().to_owned()));
    }
    let reach = problem.truncation.unwrap_or(0.0) * 2.0 + chart.length_scale();
    let map = Arc::new(ArclengthMap::new(chart, reach));
    reduce_with_map(problem, ell, map)
}

pub(crate) fn reduce_with_map(
    problem: &SpectralProblem,
    ell: u32,
    map: Arc<ArclengthMap>,
) -> Result<AxisymmetricReduction> {
    let domain = meridian_domain(&problem.chart, &map, problem.truncation)?;
    Ok(AxisymmetricReduction {
        ell,
        kinetic: problem.units.kinetic_scale(),
        domain,
        chart: problem.chart.clone(),
        map,
        selector: problem.potential,
        units: problem.units,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn catenoid_arclength_closed_form() {
        let c = 1.3;
        let chart = SurfaceChart::catenoid(c).unwrap();
        let map = ArclengthMap::new(&chart, 50.0);
        for v in [-4.0, -1.0, 0.0, 0.37, 2.5, 4.2] {
            let s = c * (v / c).sinh();
            assert_abs_diff_eq!(map.arclength(v), s, epsilon = 1e-12 * s.abs().max(1.0));
            assert_abs_diff_eq!(map.parameter(s), v, epsilon = 1e-12);
        }
    }

    #[test]
    fn bounded_meridians() {
        let sphere = SurfaceChart::sphere(2.0).unwrap();
        let map = ArclengthMap::new(&sphere, 0.0);
        assert_abs_diff_eq!(map.total_length(), 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(map.parameter(PI), PI / 2.0, epsilon = 1e-12);
        let torus = SurfaceChart::torus(3.0, 0.5).unwrap();
        let map = ArclengthMap::new(&torus, 0.0);
        assert_abs_diff_eq!(map.total_length(), PI, epsilon = 1e-12);
        // bilayer has no closed form: check s'(v) = sigma
        let b = SurfaceChart::bilayer_neck(1.0, 2.0).unwrap();
        let map = ArclengthMap::new(&b, 30.0);
        let h = 1e-4;
        for v in [-3.0, 0.2, 7.0] {
            let ds = (map.arclength(v + h) - map.arclength(v - h)) / (2.0 * h);
            assert_abs_diff_eq!(ds, b.profile(v).speed(), epsilon = 1e-7);
            assert_abs_diff_eq!(map.parameter(map.arclength(v)), v, epsilon = 1e-11);
        }
    }

    #[test]
    fn grids_nest_under_doubling() {
        let dom = |t: f64| MeridianDomain {
            lo: -t,
            hi: t,
            left: Boundary::Dirichlet,
            right: Boundary::Dirichlet,
        };
        let a = MeridianGrid::new(dom(10.0), 128);
        let b = MeridianGrid::new(dom(20.0), 256);
        assert_eq!(a.len(), 127);
        assert_abs_diff_eq!(a.step, b.step, epsilon = 1e-15);
        let offset = (b.len() - a.len()) / 2;
        for (j, &s) in a.nodes.iter().enumerate() {
            assert_abs_diff_eq!(s, b.nodes[j + offset], epsilon = 1e-12);
        }
        let pole = MeridianGrid::new(
            MeridianDomain {
                lo: 0.0,
                hi: PI,
                left: Boundary::Pole,
                right: Boundary::Pole,
            },
            64,
        );
        assert_abs_diff_eq!(pole.nodes[0], pole.step / 2.0);
        assert_abs_diff_eq!(pole.nodes[63], PI - pole.step / 2.0, epsilon = 1e-14);
        let disk = MeridianGrid::new(
            MeridianDomain {
                lo: 0.0,
                hi: 5.0,
                left: Boundary::Pole,
                right: Boundary::Dirichlet,
            },
            64,
        );
        assert_abs_diff_eq!(disk.nodes[63] + disk.step, 5.0, epsilon = 1e-13);
    }

    #[test]
    fn catenoid_channel_potential_is_a_neck_well() {
        let problem = SpectralProblem::new(
            SurfaceChart::catenoid(1.0).unwrap(),
            PotentialSelector::Dacosta,
        )
        .with_truncation(20.0);
        let red = reduce_axisymmetric(&problem, 0).unwrap();
        // closed form U0 = -(s^2 + 2c^2) / (4 (s^2 + c^2)^2)
        for s in [-15.0, -2.0, 0.0, 0.5, 3.0, 19.0] {
            let exact = -(s * s + 2.0) / (4.0 * (s * s + 1.0) * (s * s + 1.0));
            assert_abs_diff_eq!(red.liouville_potential(s), exact, epsilon = 1e-12);
        }
        assert!(red.liouville_potential(0.0) < red.liouville_potential(0.5));
        assert!(red.liouville_potential(19.0).abs() < 1e-3);
        let red1 = reduce_axisymmetric(&problem, 1).unwrap();
        assert!(red1.liouville_potential(0.0) > 0.0);
        assert!(red.flat_system().is_some());
    }

    #[test]
    fn pole_charts_have_no_flat_form() {
        let problem = SpectralProblem::new(SurfaceChart::sphere(1.0).unwrap(), PotentialSelector::None);
        let red = reduce_axisymmetric(&problem, 0).unwrap();
        assert!(red.flat_system().is_none());
        assert_eq!(red.domain.left, Boundary::Pole);
        let plane = SpectralProblem::new(SurfaceChart::plane(), PotentialSelector::None);
        assert!(matches!(reduce_axisymmetric(&plane, 0), Err(Error::MissingTruncation(_))));
        let red = reduce_axisymmetric(&plane.with_truncation(4.0), 0).unwrap();
        assert_eq!((red.domain.lo, red.domain.hi), (0.0, 4.0));
    }
}
