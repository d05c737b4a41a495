//! Surface integrals of curvature and normal-field densities: Gauss-map degrees,
//! Gauss-Bonnet and Bogomolnyi checks, and the semiclassical state-count estimators.
//!
//! Open surfaces are integrated over a meridian window `|v - v0| <= T`; the limit
//! `T -> inf` is studied explicitly by [`truncation_study`], never assumed.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::potential::{evaluate_point, PhysicalUnits};
use crate::quadrature::{NeumaierSum, QuadratureRule, Rule1d};
use crate::surface::{MeridianEnd, SurfaceChart};
use crate::{Error, Result};

const FOUR_PI: f64 = 4.0 * PI;

/// Rounding residual below which a degree is declared a clean integer.
pub const CLEAN_DEGREE_TOL: f64 = 1e-3;
/// Rounding residual above which a degree is indeterminate.
pub const INDETERMINATE_DEGREE_TOL: f64 = 0.1;
/// Allowed gap between the direct Gauss-map integral and the curvature integral, in degrees.
pub const DEGREE_ROUTE_TOL: f64 = 1e-6;
pub const MIN_RESOLUTION: usize = 16;

/// Grid size in the azimuthal (`u`) and meridian (`v`) directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub nu: usize,
    pub nv: usize,
}

impl Resolution {
    pub const fn new(nu: usize, nv: usize) -> Self {
        Self { nu, nv }
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Self::new(512, 512)
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.nu, self.nv)
    }
}

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected NxM, got {s:?}"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad grid size {t:?}: {e}"))
        };
        Ok(Self::new(parse(a)?, parse(b)?))
    }
}

/// Tensor-product quadrature over the chart domain (truncated for open surfaces).
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    chart: SurfaceChart,
    u_rule: Rule1d,
    v_rule: Rule1d,
    truncation: Option<f64>,
    resolution: Resolution,
}

/// Builds the default grid: periodic trapezoid in periodic directions, Gauss-Legendre
/// on bounded meridian windows.
pub fn build_grid(
    chart: &SurfaceChart,
    resolution: Resolution,
    truncation: Option<f64>,
) -> Result<QuadratureGrid> {
    build_grid_with_rule(chart, resolution, truncation, QuadratureRule::GaussLegendre)
}

pub fn build_grid_with_rule(
    chart: &SurfaceChart,
    resolution: Resolution,
    truncation: Option<f64>,
    meridian_rule: QuadratureRule,
) -> Result<QuadratureGrid> {
    if resolution.nu < MIN_RESOLUTION || resolution.nv < MIN_RESOLUTION {
        return Err(Error::ResolutionTooSmall(resolution));
    }
    let truncation = if chart.is_compact() {
        None
    } else {
        match truncation {
            Some(t) if t.is_finite() && t > 0.0 => Some(t),
            Some(t) => return Err(Error::InvalidTruncation(t)),
            None => return Err(Error::MissingTruncation(chart.name().to_owned())),
        }
    };

    let u_rule = Rule1d::periodic_trapezoid(resolution.nu, chart.u_domain().lo);
    let v_rule = if chart.periodic_v() {
        Rule1d::periodic_trapezoid(resolution.nv, chart.v_domain().lo)
    } else {
        let dom = chart.v_domain();
        let center = chart.meridian_center();
        let (lo, hi) = match truncation {
            Some(t) => ((center - t).max(dom.lo), (center + t).min(dom.hi)),
            None => (dom.lo, dom.hi),
        };
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidTruncation(truncation.unwrap_or(f64::NAN)));
        }
        match meridian_rule {
            QuadratureRule::GaussLegendre => Rule1d::gauss_legendre(resolution.nv, lo, hi),
            QuadratureRule::CompositeSimpson => {
                let (end_lo, end_hi) = chart.meridian_ends();
                let touches_pole = (end_lo == MeridianEnd::Pole && lo <= dom.lo)
                    || (end_hi == MeridianEnd::Pole && hi >= dom.hi);
                if touches_pole {
                    return Err(Error::UnsuitableRule(format!(
                        "composite Simpson would evaluate the pole of {}",
                        chart.name()
                    )));
                }
                Rule1d::composite_simpson(resolution.nv, lo, hi)
            }
            QuadratureRule::PeriodicTrapezoid => {
                return Err(Error::UnsuitableRule(
                    "periodic trapezoid on a non-periodic meridian".into(),
                ))
            }
        }
    };

    Ok(QuadratureGrid {
        chart: chart.clone(),
        u_rule,
        v_rule,
        truncation,
        resolution,
    })
}

/// Fields evaluated at one grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeFields {
    pub u: f64,
    pub v: f64,
    pub weight: f64,
    pub sqrt_g: f64,
    pub gauss: f64,
    pub mean: f64,
    pub split_sq: f64,
    pub grad_n_sq: f64,
    pub div_n: f64,
    pub degree_density: f64,
    pub v_dacosta: f64,
    pub v_paper8: f64,
    pub p_sq: f64,
}

impl QuadratureGrid {
    pub fn chart(&self) -> &SurfaceChart {
        &self.chart
    }

    pub fn truncation(&self) -> Option<f64> {
        self.truncation
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn rules(&self) -> (QuadratureRule, QuadratureRule) {
        (self.u_rule.rule, self.v_rule.rule)
    }

    pub fn len(&self) -> usize {
        self.u_rule.len() * self.v_rule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn meridian_window(&self) -> (f64, f64) {
        let dom = self.chart.v_domain();
        let center = self.chart.meridian_center();
        match self.truncation {
            Some(t) => ((center - t).max(dom.lo), (center + t).min(dom.hi)),
            None => (dom.lo, dom.hi),
        }
    }

    /// Node `k` in meridian-major order with its tensor weight.
    pub fn node(&self, k: usize) -> (f64, f64, f64) {
        let nu = self.u_rule.len();
        let (i, j) = (k % nu, k / nu);
        (
            self.u_rule.nodes[i],
            self.v_rule.nodes[j],
            self.u_rule.weights[i] * self.v_rule.weights[j],
        )
    }

    /// Sum of all weights: the area of the integration window in `(u, v)`.
    pub fn total_weight(&self) -> f64 {
        (0..self.len()).map(|k| self.node(k).2).collect::<NeumaierSum>().total()
    }

    /// `sum_ij w_ij f(u_i, v_j) sqrt_g(u_i, v_j)`.
    pub fn integrate_density<F>(&self, density: F) -> Result<f64>
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let terms: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|k| {
                let (u, v, w) = self.node(k);
                let point = self.chart.evaluate(u, v)?;
                let sqrt_g = point.d_u.cross(&point.d_v).norm();
                let f = density(u, v);
                if !f.is_finite() {
                    return Err(Error::NonFiniteDensity { u, v });
                }
                Ok(w * f * sqrt_g)
            })
            .collect::<Result<_>>()?;
        Ok(terms.into_iter().collect::<NeumaierSum>().total())
    }

    /// Evaluates every field at every node. Nodes are computed in parallel and
    /// stored in grid order, so later reductions do not depend on the worker count.
    pub fn evaluate(&self, units: &PhysicalUnits) -> Result<GridSamples> {
        let nodes: Vec<NodeFields> = (0..self.len())
            .into_par_iter()
            .map(|k| {
                let (u, v, weight) = self.node(k);
                let (curv, normal, sigma) = evaluate_point(&self.chart, u, v, units)?;
                let f = NodeFields {
                    u,
                    v,
                    weight,
                    sqrt_g: curv.sqrt_g,
                    gauss: curv.gauss,
                    mean: curv.mean,
                    split_sq: curv.principal_split_sq(),
                    grad_n_sq: normal.grad_n_sq,
                    div_n: normal.div_n,
                    degree_density: normal.degree_density,
                    v_dacosta: sigma.v_dacosta,
                    v_paper8: sigma.v_paper8,
                    p_sq: sigma.p_sq,
                };
                let values = [
                    f.sqrt_g,
                    f.gauss,
                    f.mean,
                    f.grad_n_sq,
                    f.div_n,
                    f.degree_density,
                    f.v_dacosta,
                ];
                if values.iter().all(|x| x.is_finite()) {
                    Ok(f)
                } else {
                    Err(Error::NonFiniteDensity { u, v })
                }
            })
            .collect::<Result<_>>()?;
        let (v_lo, v_hi) = if self.chart.periodic_v() {
            let lo = self.chart.v_domain().lo;
            (lo, lo + std::f64::consts::TAU)
        } else {
            self.meridian_window()
        };
        Ok(GridSamples {
            chart: self.chart.clone(),
            truncation: self.truncation,
            nu: self.u_rule.len(),
            v_window: (v_lo, v_hi),
            resolution: self.resolution,
            rules: self.rules(),
            units: *units,
            nodes,
        })
    }
}

/// All node fields of one grid, in grid order.
#[derive(Debug, Clone)]
pub struct GridSamples {
    pub chart: SurfaceChart,
    pub truncation: Option<f64>,
    /// Azimuthal node count; nodes are stored meridian-major.
    pub nu: usize,
    /// Meridian integration window (one period for periodic meridians).
    pub v_window: (f64, f64),
    pub resolution: Resolution,
    pub rules: (QuadratureRule, QuadratureRule),
    pub units: PhysicalUnits,
    pub nodes: Vec<NodeFields>,
}

impl GridSamples {
    /// `iint f dS`.
    pub fn integrate(&self, f: impl Fn(&NodeFields) -> f64) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.weight * n.sqrt_g * f(n))
            .collect::<NeumaierSum>()
            .total()
    }

    /// `iint f du dv`, no area element.
    pub fn integrate_chart(&self, f: impl Fn(&NodeFields) -> f64) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.weight * f(n))
            .collect::<NeumaierSum>()
            .total()
    }

    /// `iint |K| dS`.
    ///
    /// `|K|` has kinks where `K` changes sign, which would cap every rule at second
    /// order. Each meridian line with a sign change is split at the refined zeros of
    /// `K sqrt(g)` and the smooth pieces are integrated with panel Gauss-Legendre;
    /// lines of one sign use the grid rule directly.
    pub fn integrate_abs_gauss(&self) -> Result<f64> {
        let nu = self.nu;
        let nv = self.nodes.len() / nu;
        let periodic = self.chart.periodic_v();
        let (lo, hi) = self.v_window;
        let h = (hi - lo) / nv as f64;
        let lines: Vec<f64> = (0..nu)
            .into_par_iter()
            .map(|i| {
                let line: Vec<&NodeFields> = (0..nv).map(|j| &self.nodes[j * nu + i]).collect();
                let u = line[0].u;
                // azimuth always uses the periodic trapezoid
                let u_weight = std::f64::consts::TAU / nu as f64;
                let f = |v: f64| -> Result<f64> {
                    let p = self.chart.evaluate(u, v)?;
                    let c = crate::surface::curvatures(&p)?;
                    Ok(c.gauss * c.sqrt_g)
                };
                let signed: Vec<f64> = line.iter().map(|n| n.gauss * n.sqrt_g).collect();
                let mut roots = Vec::new();
                let pairs = if periodic { nv } else { nv - 1 };
                for j in 0..pairs {
                    let k = (j + 1) % nv;
                    let (a, b) = (line[j].v, if k == 0 { line[k].v + (hi - lo) } else { line[k].v });
                    let (fa, fb) = (signed[j], signed[k]);
                    if fa == 0.0 || (fb != 0.0 && fa.signum() != fb.signum()) {
                        roots.push(bisect_root(&f, a, b, fa)?);
                    }
                }
                if roots.is_empty() {
                    let line_sum: NeumaierSum = line.iter().map(|n| n.weight * (n.gauss * n.sqrt_g).abs()).collect();
                    return Ok(line_sum.total());
                }
                let mut cuts = roots;
                if periodic {
                    cuts.push(cuts[0] + (hi - lo));
                } else {
                    cuts.insert(0, lo);
                    cuts.push(hi);
                }
                let mut acc = NeumaierSum::default();
                for w in cuts.windows(2) {
                    acc.add(panel_integral(&f, w[0], w[1], h)?.abs());
                }
                Ok(u_weight * acc.total())
            })
            .collect::<Result<_>>()?;
        Ok(lines.into_iter().collect::<NeumaierSum>().total())
    }

    pub fn min_max(&self, f: impl Fn(&NodeFields) -> f64) -> (f64, f64) {
        self.nodes.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        })
    }
}

fn bisect_root(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, fa: f64) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    let sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Composite 8-point Gauss-Legendre over `[a, b]` with panels no wider than `h`.
fn panel_integral(f: &impl Fn(f64) -> Result<f64>, a: f64, b: f64, h: f64) -> Result<f64> {
    let panels = ((b - a) / h).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let rule = Rule1d::gauss_legendre(8, 0.0, width);
    let mut acc = NeumaierSum::default();
    for p in 0..panels {
        let start = a + p as f64 * width;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            acc.add(w * f(start + x)?);
        }
    }
    Ok(acc.total())
}

fn rounding(x: f64) -> (i64, f64) {
    let r = x.round();
    (r as i64, (x - r).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussMapDegrees {
    /// `(1/4pi) iint n . (n_u x n_v) du dv`.
    pub signed_direct: f64,
    /// `(1/4pi) iint K dS`.
    pub signed_from_curvature: f64,
    pub signed_degree: i64,
    pub signed_residual: f64,
    /// `(1/4pi) iint |K| dS`.
    pub absolute_raw: f64,
    pub absolute_degree: i64,
    pub absolute_residual: f64,
    pub clean: bool,
}

/// Degrees without the integrality checks; used by the truncation study.
pub fn raw_degrees(samples: &GridSamples) -> Result<GaussMapDegrees> {
    let signed_direct = samples.integrate_chart(|n| n.degree_density) / FOUR_PI;
    let signed_from_curvature = samples.integrate(|n| n.gauss) / FOUR_PI;
    let absolute_raw = samples.integrate_abs_gauss()? / FOUR_PI;
    let (signed_degree, signed_residual) = rounding(signed_from_curvature);
    let (absolute_degree, absolute_residual) = rounding(absolute_raw);
    Ok(GaussMapDegrees {
        signed_direct,
        signed_from_curvature,
        signed_degree,
        signed_residual,
        absolute_raw,
        absolute_degree,
        absolute_residual,
        clean: signed_residual < CLEAN_DEGREE_TOL && absolute_residual < CLEAN_DEGREE_TOL,
    })
}

/// Signed and absolute Gauss-map degrees, computed by two routes for the signed one.
pub fn gauss_map_degrees(samples: &GridSamples) -> Result<GaussMapDegrees> {
    let d = raw_degrees(samples)?;
    let gap = (d.signed_direct - d.signed_from_curvature).abs();
    if gap > DEGREE_ROUTE_TOL {
        return Err(Error::InvariantViolation(format!(
            "Gauss-map degree routes disagree by {gap:e} (direct {}, curvature {})",
            d.signed_direct, d.signed_from_curvature
        )));
    }
    for (what, residual) in [("signed", d.signed_residual), ("absolute", d.absolute_residual)] {
        if residual > INDETERMINATE_DEGREE_TOL {
            return Err(Error::DegreeIndeterminate {
                what,
                residual,
                surface: samples.chart.name().to_owned(),
            });
        }
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BogomolnyiCheck {
    /// `iint (grad n)^2 dS`.
    pub dirichlet_energy: f64,
    /// The sweep count used in the `4 pi` bound: the absolute degree.
    pub paper_degree: i64,
    /// `E - 4 pi |paper_degree|`.
    pub margin_paper: f64,
    /// `E - 8 pi |Q|` with the integrated (unrounded) signed degree.
    pub margin_strict: f64,
    pub tolerance: f64,
}

pub fn bogomolnyi_check(samples: &GridSamples, degrees: &GaussMapDegrees) -> Result<BogomolnyiCheck> {
    let energy = samples.integrate(|n| n.grad_n_sq);
    let tolerance = 1e-6 * energy.abs().max(1.0);
    let paper_degree = degrees.absolute_degree.abs();
    let check = BogomolnyiCheck {
        dirichlet_energy: energy,
        paper_degree,
        margin_paper: energy - FOUR_PI * paper_degree as f64,
        margin_strict: energy - 2.0 * FOUR_PI * degrees.signed_from_curvature.abs(),
        tolerance,
    };
    if check.margin_paper < -tolerance || check.margin_strict < -tolerance {
        return Err(Error::InvariantViolation(format!(
            "Bogomolnyi bound violated: energy {energy}, margins {} / {}",
            check.margin_paper, check.margin_strict
        )));
    }
    Ok(check)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateCounts {
    /// `(1/pi) iint [(grad n)^2 + (div n)^2] dS`.
    pub n_paper: f64,
    /// `(1/pi) iint (grad n)^2 dS`.
    pub n_sigma_lower: f64,
    /// `(1/4pi) iint (kappa1 - kappa2)^2 dS`.
    pub n_dacosta: f64,
    /// `4 x paper_degree`.
    pub paper_bound: f64,
    pub paper_ge_sigma: bool,
    pub sigma_ge_bound: bool,
    pub paper_ge_dacosta: bool,
}

/// Integrated density of states `p^2 / (pi hbar^2)` for the two momentum scales.
pub fn state_count_estimates(samples: &GridSamples, degrees: &GaussMapDegrees) -> StateCounts {
    let hbar_sq = samples.units.hbar * samples.units.hbar;
    let n_paper = samples.integrate(|n| n.grad_n_sq + n.div_n * n.div_n) / PI;
    let n_sigma_lower = samples.integrate(|n| n.grad_n_sq) / PI;
    let n_dacosta = samples.integrate(|n| n.p_sq) / (PI * hbar_sq);
    let paper_bound = 4.0 * degrees.absolute_degree.abs() as f64;
    let tol = 1e-6 * n_paper.abs().max(1.0);
    StateCounts {
        n_paper,
        n_sigma_lower,
        n_dacosta,
        paper_bound,
        paper_ge_sigma: n_paper >= n_sigma_lower - tol,
        sigma_ge_bound: n_sigma_lower >= paper_bound - tol,
        paper_ge_dacosta: n_paper >= n_dacosta - tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopoReport {
    pub surface: String,
    pub truncation: Option<f64>,
    pub resolution: Resolution,
    pub u_rule: QuadratureRule,
    pub v_rule: QuadratureRule,
    pub area: f64,
    pub total_curvature: f64,
    pub degrees: GaussMapDegrees,
    pub willmore_energy: f64,
    pub bogomolnyi: BogomolnyiCheck,
    pub counts: StateCounts,
    pub euler_characteristic: Option<i32>,
    /// `|iint K dS - 2 pi chi|`, closed surfaces only.
    pub gauss_bonnet_residual: Option<f64>,
}

pub fn topo_report(samples: &GridSamples) -> Result<TopoReport> {
    let degrees = gauss_map_degrees(samples)?;
    let bogomolnyi = bogomolnyi_check(samples, &degrees)?;
    let counts = state_count_estimates(samples, &degrees);
    if !counts.paper_ge_sigma || counts.n_sigma_lower < -1e-12 {
        return Err(Error::InvariantViolation(format!(
            "estimator ordering violated: N_paper={} N_sigma={}",
            counts.n_paper, counts.n_sigma_lower
        )));
    }
    let total_curvature = samples.integrate(|n| n.gauss);
    let chi = samples.chart.euler_characteristic();
    Ok(TopoReport {
        surface: samples.chart.name().to_owned(),
        truncation: samples.truncation,
        resolution: samples.resolution,
        u_rule: samples.rules.0,
        v_rule: samples.rules.1,
        area: samples.integrate(|_| 1.0),
        total_curvature,
        degrees,
        willmore_energy: samples.integrate(|n| n.mean * n.mean),
        bogomolnyi,
        counts,
        euler_characteristic: chi,
        gauss_bonnet_residual: chi.map(|chi| (total_curvature - 2.0 * PI * chi as f64).abs()),
    })
}

/// Builds the grid, evaluates it and assembles the report in one call.
pub fn analyze_topology(
    chart: &SurfaceChart,
    resolution: Resolution,
    truncation: Option<f64>,
    units: &PhysicalUnits,
) -> Result<(TopoReport, GridSamples)> {
    let samples = build_grid(chart, resolution, truncation)?.evaluate(units)?;
    Ok((topo_report(&samples)?, samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationRow {
    pub truncation: f64,
    pub total_curvature: f64,
    pub signed_degree: f64,
    pub absolute_degree: f64,
    pub dirichlet_energy: f64,
    pub n_paper: f64,
    pub n_sigma_lower: f64,
    pub n_dacosta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationStudy {
    pub surface: String,
    pub compact: bool,
    pub rows: Vec<TruncationRow>,
    /// Aitken extrapolation of the last three rows.
    pub limit: TruncationRow,
    /// Exponential rate `ln(d_k / d_{k+1}) / (T_{k+1} - T_k)` of total-curvature increments.
    pub exponential_rate: Option<f64>,
    /// Algebraic order `ln(d_k / d_{k+1}) / ln(T_{k+1} / T_k)` of the same increments.
    pub algebraic_order: Option<f64>,
    /// `|total_curvature - limit|` is non-increasing along the table.
    pub residuals_monotone: bool,
    /// Last row has integer degrees to within the clean tolerance.
    pub degrees_stable: bool,
}

fn aitken(x0: f64, x1: f64, x2: f64) -> f64 {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let denom = d2 - d1;
    let scale = x0.abs().max(x1.abs()).max(x2.abs()).max(1.0);
    if denom.abs() <= 1e-13 * scale || d2.abs() <= 1e-13 * scale {
        x2
    } else {
        x2 - d2 * d2 / denom
    }
}

/// Tabulates the integrated invariants against the truncation half-width.
pub fn truncation_study(
    chart: &SurfaceChart,
    truncations: &[f64],
    resolution: Resolution,
    units: &PhysicalUnits,
) -> Result<TruncationStudy> {
    if truncations.len() < 3 {
        return Err(Error::InvalidStudy(
            "truncation study needs at least three T values".into(),
        ));
    }
    if truncations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidStudy(
            "truncation values must increase strictly".into(),
        ));
    }

    let rows = truncations
        .iter()
        .map(|&t| {
            let samples = build_grid(chart, resolution, Some(t))?.evaluate(units)?;
            let d = raw_degrees(&samples)?;
            Ok(TruncationRow {
                truncation: t,
                total_curvature: samples.integrate(|n| n.gauss),
                signed_degree: d.signed_from_curvature,
                absolute_degree: d.absolute_raw,
                dirichlet_energy: samples.integrate(|n| n.grad_n_sq),
                n_paper: samples.integrate(|n| n.grad_n_sq + n.div_n * n.div_n) / PI,
                n_sigma_lower: samples.integrate(|n| n.grad_n_sq) / PI,
                n_dacosta: samples.integrate(|n| n.p_sq) / (PI * units.hbar * units.hbar),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let k = rows.len();
    let (a, b, c) = (&rows[k - 3], &rows[k - 2], &rows[k - 1]);
    let ex = |f: fn(&TruncationRow) -> f64| aitken(f(a), f(b), f(c));
    let limit = TruncationRow {
        truncation: f64::INFINITY,
        total_curvature: ex(|r| r.total_curvature),
        signed_degree: ex(|r| r.signed_degree),
        absolute_degree: ex(|r| r.absolute_degree),
        dirichlet_energy: ex(|r| r.dirichlet_energy),
        n_paper: ex(|r| r.n_paper),
        n_sigma_lower: ex(|r| r.n_sigma_lower),
        n_dacosta: ex(|r| r.n_dacosta),
    };

    let increments: Vec<(f64, f64, f64)> = rows
        .windows(2)
        .map(|w| (w[0].truncation, w[1].truncation, (w[1].total_curvature - w[0].total_curvature).abs()))
        .collect();
    let floor = 1e-13 * limit.total_curvature.abs().max(1.0);
    let (mut exp_rate, mut alg_order) = (None, None);
    if let Some(pair) = increments
        .windows(2)
        .rfind(|p| p[0].2 > floor && p[1].2 > floor)
    {
        // increment k decays with the truncation it starts from
        let ratio = (pair[0].2 / pair[1].2).ln();
        exp_rate = Some(ratio / (pair[1].0 - pair[0].0));
        alg_order = Some(ratio / (pair[1].0 / pair[0].0).ln());
    }

    let residuals: Vec<f64> = rows
        .iter()
        .map(|r| (r.total_curvature - limit.total_curvature).abs())
        .collect();
    let residuals_monotone = residuals.windows(2).all(|w| w[1] <= w[0] + floor);
    let last = &rows[k - 1];
    let residual = |x: f64| (x - x.round()).abs();
    let degrees_stable = residual(last.signed_degree) < CLEAN_DEGREE_TOL
        && residual(last.absolute_degree) < CLEAN_DEGREE_TOL;

    Ok(TruncationStudy {
        surface: chart.name().to_owned(),
        compact: chart.is_compact(),
        rows,
        limit,
        exponential_rate: exp_rate,
        algebraic_order: alg_order,
        residuals_monotone,
        degrees_stable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    fn units() -> PhysicalUnits {
        PhysicalUnits::default()
    }

    #[test]
    fn grid_construction() {
        let torus = SurfaceChart::torus(2.0, 1.0).unwrap();
        let g = build_grid(&torus, Resolution::new(256, 256), None).unwrap();
        assert!(g.truncation().is_none());
        assert_eq!(g.rules(), (QuadratureRule::PeriodicTrapezoid, QuadratureRule::PeriodicTrapezoid));
        assert_abs_diff_eq!(g.total_weight(), TAU * TAU, epsilon = 1e-12);

        let cat = SurfaceChart::catenoid(1.0).unwrap();
        let g = build_grid(&cat, Resolution::new(64, 512), Some(20.0)).unwrap();
        assert_eq!(g.truncation(), Some(20.0));
        assert_abs_diff_eq!(g.total_weight(), TAU * 40.0, epsilon = 1e-12);
        let (_, v_first, _) = g.node(0);
        assert!(v_first > -20.0 && v_first < -19.9);

        let plane = SurfaceChart::plane();
        let g = build_grid(&plane, Resolution::new(32, 32), Some(3.0)).unwrap();
        assert_abs_diff_eq!(g.total_weight(), TAU * 3.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_errors() {
        let cat = SurfaceChart::catenoid(1.0).unwrap();
        assert!(matches!(
            build_grid(&cat, Resolution::new(64, 64), None),
            Err(Error::MissingTruncation(_))
        ));
        assert!(matches!(
            build_grid(&cat, Resolution::new(64, 64), Some(-1.0)),
            Err(Error::InvalidTruncation(_))
        ));
        assert!(matches!(
            build_grid(&cat, Resolution::new(8, 64), Some(1.0)),
            Err(Error::ResolutionTooSmall(_))
        ));
        let sphere = SurfaceChart::sphere(1.0).unwrap();
        assert!(matches!(
            build_grid_with_rule(&sphere, Resolution::new(32, 32), None, QuadratureRule::CompositeSimpson),
            Err(Error::UnsuitableRule(_))
        ));
        let g = build_grid(&sphere, Resolution::new(32, 32), None).unwrap();
        assert!(matches!(
            g.integrate_density(|_, v| if v > 1.0 { f64::NAN } else { 1.0 }),
            Err(Error::NonFiniteDensity { .. })
        ));
    }

    #[test]
    fn resolution_parsing() {
        assert_eq!("512x256".parse::<Resolution>().unwrap(), Resolution::new(512, 256));
        assert!("512".parse::<Resolution>().is_err());
        assert!("ax3".parse::<Resolution>().is_err());
    }

    #[test]
    fn integration_examples() {
        let sphere = SurfaceChart::sphere(1.0).unwrap();
        let g = build_grid(&sphere, Resolution::new(64, 64), None).unwrap();
        assert_abs_diff_eq!(g.integrate_density(|_, _| 1.0).unwrap(), 4.0 * PI, epsilon = 1e-8);

        let torus = SurfaceChart::torus(2.0, 1.0).unwrap();
        let s = build_grid(&torus, Resolution::new(64, 64), None).unwrap().evaluate(&units()).unwrap();
        assert_abs_diff_eq!(s.integrate(|n| n.gauss), 0.0, epsilon = 1e-8);

        let cat = SurfaceChart::catenoid(1.0).unwrap();
        let s = build_grid(&cat, Resolution::new(32, 512), Some(20.0)).unwrap().evaluate(&units()).unwrap();
        let exact = -4.0 * PI * 20f64.tanh();
        assert_abs_diff_eq!(s.integrate(|n| n.gauss), exact, epsilon = 1e-6);
    }

    #[test]
    fn simpson_agrees_with_gauss_legendre() {
        let cat = SurfaceChart::catenoid(1.0).unwrap();
        let res = Resolution::new(16, 2048);
        let a = build_grid_with_rule(&cat, res, Some(6.0), QuadratureRule::CompositeSimpson)
            .unwrap()
            .evaluate(&units())
            .unwrap()
            .integrate(|n| n.gauss);
        assert_abs_diff_eq!(a, -4.0 * PI * 6f64.tanh(), epsilon = 1e-8);
    }

    #[test]
    fn degrees_examples() {
        let (r, _) = analyze_topology(&SurfaceChart::torus(2.0, 1.0).unwrap(), Resolution::new(128, 128), None, &units()).unwrap();
        assert_eq!(r.degrees.signed_degree, 0);
        assert_eq!(r.degrees.absolute_degree, 2);
        assert!(r.degrees.clean);
        assert_abs_diff_eq!(r.degrees.absolute_raw * 4.0 * PI, 8.0 * PI, epsilon = 1e-8);

        let (r, _) = analyze_topology(&SurfaceChart::sphere(1.0).unwrap(), Resolution::new(64, 64), None, &units()).unwrap();
        assert_eq!(r.degrees.signed_degree.abs(), 1);
        assert_eq!(r.degrees.absolute_degree, 1);
        assert_abs_diff_eq!(r.gauss_bonnet_residual.unwrap(), 0.0, epsilon = 1e-8);

        let (r, _) = analyze_topology(&SurfaceChart::catenoid(1.0).unwrap(), Resolution::new(32, 512), Some(20.0), &units()).unwrap();
        assert_eq!(r.degrees.signed_degree.abs(), 1);
        assert!(r.degrees.signed_residual < 1e-6);
    }

    #[test]
    fn indeterminate_degree_is_an_error() {
        let cat = SurfaceChart::catenoid(1.0).unwrap();
        let s = build_grid(&cat, Resolution::new(32, 128), Some(0.4)).unwrap().evaluate(&units()).unwrap();
        assert!(matches!(gauss_map_degrees(&s), Err(Error::DegreeIndeterminate { .. })));
    }

    #[test]
    fn bogomolnyi_and_counts() {
        let t = 20.0;
        let (r, _) = analyze_topology(&SurfaceChart::catenoid(1.0).unwrap(), Resolution::new(32, 512), Some(t), &units()).unwrap();
        let e = r.bogomolnyi.dirichlet_energy;
        assert_abs_diff_eq!(e, 8.0 * PI * t.tanh(), epsilon = 1e-6);
        assert_abs_diff_eq!(r.bogomolnyi.margin_paper, 4.0 * PI, epsilon = 1e-6);
        assert_abs_diff_eq!(r.counts.n_sigma_lower, 8.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.counts.n_paper, 8.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.counts.n_dacosta, 4.0, epsilon = 1e-6);
        assert!(r.counts.sigma_ge_bound && r.counts.paper_ge_dacosta);

        let (r, _) = analyze_topology(&SurfaceChart::torus(2.0, 1.0).unwrap(), Resolution::new(128, 128), None, &units()).unwrap();
        let willmore = PI * PI * 4.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r.willmore_energy, willmore, epsilon = 1e-8);
        assert_abs_diff_eq!(r.bogomolnyi.dirichlet_energy, 4.0 * willmore, epsilon = 1e-8);
        assert_abs_diff_eq!(r.counts.n_paper, 32.0 * PI / 3f64.sqrt(), epsilon = 1e-8);
        assert!(r.bogomolnyi.margin_paper > 0.0);

        let (r, _) = analyze_topology(&SurfaceChart::plane(), Resolution::new(32, 64), Some(10.0), &units()).unwrap();
        assert_eq!(r.bogomolnyi.dirichlet_energy, 0.0);
        assert_eq!(r.degrees.absolute_degree, 0);
        assert_eq!(r.bogomolnyi.margin_paper, 0.0);
        assert_eq!([r.counts.n_paper, r.counts.n_sigma_lower, r.counts.n_dacosta], [0.0; 3]);
    }

    #[test]
    fn truncation_study_catenoid() {
        let cat = SurfaceChart::catenoid(1.0).unwrap();
        let st = truncation_study(&cat, &[5.0, 10.0, 20.0], Resolution::new(16, 512), &units()).unwrap();
        for row in &st.rows {
            assert_abs_diff_eq!(row.total_curvature, -4.0 * PI * row.truncation.tanh(), epsilon = 1e-9);
        }
        assert!(st.residuals_monotone);
        assert!(st.degrees_stable);
        assert_abs_diff_eq!(st.limit.total_curvature, -4.0 * PI, epsilon = 1e-9);
        // increments ~ exp(-2T): rate close to 2
        let rate = st.exponential_rate.unwrap();
        assert!((rate - 2.0).abs() < 0.05, "{rate}");
    }

    #[test]
    fn truncation_study_torus_is_flat() {
        let torus = SurfaceChart::torus(2.0, 1.0).unwrap();
        let st = truncation_study(&torus, &[1.0, 2.0, 4.0], Resolution::new(32, 32), &units()).unwrap();
        assert!(st.compact);
        assert!(st.rows.windows(2).all(|w| w[0].total_curvature == w[1].total_curvature));
        assert!(truncation_study(&torus, &[1.0, 2.0], Resolution::new(32, 32), &units()).is_err());
        assert!(truncation_study(&torus, &[1.0, 3.0, 2.0], Resolution::new(32, 32), &units()).is_err());
    }

    #[test]
    fn bilayer_total_curvature_tends_to_minus_four_pi() {
        let b = SurfaceChart::bilayer_neck(1.0, 1.0).unwrap();
        let st = truncation_study(&b, &[5.0, 10.0, 20.0], Resolution::new(16, 1024), &units()).unwrap();
        assert!(st.residuals_monotone);
        assert!(st.degrees_stable);
        assert!((st.limit.total_curvature + 4.0 * PI).abs() < 1e-3 * 4.0 * PI);
        assert!((st.limit.absolute_degree - 1.0).abs() < 1e-3);
    }

    #[test]
    fn gauss_bonnet_converges_spectrally() {
        // a thin torus makes the coarse residual visible
        let torus = SurfaceChart::torus(1.1, 1.0).unwrap();
        let residual = |n: usize| {
            build_grid(&torus, Resolution::new(n, n), None)
                .unwrap()
                .evaluate(&units())
                .unwrap()
                .integrate(|f| f.gauss)
                .abs()
        };
        let mut prev = residual(16);
        for n in [32, 64] {
            let r = residual(n);
            assert!(r <= 1e-12 || r * 10.0 <= prev, "n={n}: {r} vs {prev}");
            prev = r;
        }
    }
}
