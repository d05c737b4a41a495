//! The geometric quantum potential in curvature form and in the normal-field
//! (sigma-model) forms, with the coefficient discrepancies between them kept
//! as measurable residuals.
//!
//! The curvature form `V = -(hbar^2/8m)(kappa1 - kappa2)^2` is canonical and is
//! what the spectral solver and the state estimators use. The two normal-field
//! forms carried alongside are
//!
//! - `paper7 = -(hbar^2/4m) [(grad n)^2 + (div n)^2]`
//! - `paper8 = -(hbar^2/2m) [(grad n)^2 + (div n)^2]`
//!
//! and the algebraically exact rewrite is
//! `corrected = -(hbar^2/8m) [2 (grad n)^2 - (div n)^2]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::surface::{
    curvatures, sigma_densities, CurvatureData, GeometryError, NormalDensities, SurfaceChart,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalUnits {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for PhysicalUnits {
    /// `hbar = 1`, `2m = 1`.
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 0.5,
        }
    }
}

impl PhysicalUnits {
    pub fn new(hbar: f64, mass: f64) -> Result<Self, GeometryError> {
        for (name, value) in [("hbar", hbar), ("mass", mass)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(GeometryError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        Ok(Self { hbar, mass })
    }

    /// `hbar^2 / 2m`.
    pub fn kinetic_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }

    pub fn describe(&self) -> String {
        format!(
            "hbar={}, m={} (hbar^2/2m={})",
            self.hbar,
            self.mass,
            self.kinetic_scale()
        )
    }
}

/// `-(hbar^2/8m)(kappa1 - kappa2)^2`. Orientation independent, zero at umbilics.
pub fn gqp(curv: &CurvatureData, units: &PhysicalUnits) -> f64 {
    -0.25 * units.kinetic_scale() * curv.principal_split_sq()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaDensities {
    pub grad_n_sq: f64,
    pub div_n_sq: f64,
    pub n_lap_n: f64,
    pub v_dacosta: f64,
    pub v_paper7: f64,
    pub v_paper8: f64,
    pub v_corrected: f64,
    /// `2m |V_dacosta|`.
    pub p_sq: f64,
    /// `|V_dacosta - V_corrected|`.
    pub corrected_residual: f64,
}

pub fn sigma_decomposition(
    curv: &CurvatureData,
    normal: &NormalDensities,
    units: &PhysicalUnits,
) -> SigmaDensities {
    let kin = units.kinetic_scale();
    let grad_n_sq = normal.grad_n_sq;
    let div_n_sq = normal.div_n * normal.div_n;
    let v_dacosta = gqp(curv, units);
    let v_paper8 = -kin * (grad_n_sq + div_n_sq);
    let v_corrected = -0.25 * kin * (2.0 * grad_n_sq - div_n_sq);
    SigmaDensities {
        grad_n_sq,
        div_n_sq,
        n_lap_n: normal.n_lap_n,
        v_dacosta,
        v_paper7: 0.5 * v_paper8,
        v_paper8,
        v_corrected,
        p_sq: -2.0 * units.mass * v_dacosta,
        corrected_residual: (v_dacosta - v_corrected).abs(),
    }
}

/// Curvatures, normal densities and all potential forms at one chart point.
pub fn evaluate_point(
    chart: &SurfaceChart,
    u: f64,
    v: f64,
    units: &PhysicalUnits,
) -> Result<(CurvatureData, NormalDensities, SigmaDensities), GeometryError> {
    let point = chart.evaluate(u, v)?;
    let curv = curvatures(&point)?;
    let normal = sigma_densities(&point, &curv)?;
    let sigma = sigma_decomposition(&curv, &normal, units);
    Ok((curv, normal, sigma))
}

/// Uniform random chart points, seeded. Open meridians are restricted to a window of
/// half-width `truncation` around the throat; pole neighbourhoods are avoided.
pub fn sample_points(
    chart: &SurfaceChart,
    count: usize,
    truncation: f64,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dom = chart.v_domain();
    let margin = 1e-3 * chart.length_scale();
    let center = chart.meridian_center();
    let lo = if dom.lo.is_finite() {
        dom.lo + margin
    } else {
        center - truncation
    };
    let hi = if dom.hi.is_finite() {
        dom.hi - margin
    } else {
        center + truncation
    };
    let lo = lo.max(dom.lo + margin);
    let hi = hi.min(dom.hi - margin);
    (0..count)
        .map(|_| {
            let u = rng.gen_range(0.0..std::f64::consts::TAU);
            let v = rng.gen_range(lo..hi);
            (u, v)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscrepancyStat {
    pub max_abs: f64,
    pub mean_abs: f64,
    /// `max_abs / max |V_dacosta|`; absent when the canonical potential vanishes
    /// identically on the samples.
    pub relative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscrepancyReport {
    pub samples: usize,
    pub max_abs_v_dacosta: f64,
    pub paper8: DiscrepancyStat,
    pub paper7: DiscrepancyStat,
    pub corrected: DiscrepancyStat,
    /// Every sample has `div n = 0` to rounding.
    pub minimal_surface: bool,
    /// `|K - (grad n)^2|` on minimal surfaces, where the sigma-model energy density is
    /// sometimes equated with the Gauss curvature. On a minimal surface `(grad n)^2 = -2K`.
    pub minimal_gauss_claim: Option<DiscrepancyStat>,
}

impl DiscrepancyReport {
    /// The exact normal-field rewrite reproduces the curvature form to `tol` relative.
    pub fn corrected_within(&self, tol: f64, curvature_scale: f64) -> bool {
        self.corrected.max_abs <= tol * self.max_abs_v_dacosta.max(curvature_scale)
    }
}

fn stat(diffs: &[f64], reference: f64, floor: f64) -> DiscrepancyStat {
    let max_abs = diffs.iter().copied().fold(0.0, f64::max);
    let mean_abs = if diffs.is_empty() {
        0.0
    } else {
        diffs.iter().sum::<f64>() / diffs.len() as f64
    };
    DiscrepancyStat {
        max_abs,
        mean_abs,
        relative: (reference > floor).then(|| max_abs / reference),
    }
}

pub fn discrepancy_report(
    chart: &SurfaceChart,
    samples: &[(f64, f64)],
    units: &PhysicalUnits,
) -> Result<DiscrepancyReport, GeometryError> {
    let mut d8 = Vec::with_capacity(samples.len());
    let mut d7 = Vec::with_capacity(samples.len());
    let mut dc = Vec::with_capacity(samples.len());
    let mut gauss_claim = Vec::with_capacity(samples.len());
    let mut max_vd: f64 = 0.0;
    let mut minimal = true;
    let scale = chart.length_scale();
    let curvature_scale = 1.0 / (scale * scale);

    for &(u, v) in samples {
        let (curv, normal, sigma) = evaluate_point(chart, u, v, units)?;
        max_vd = max_vd.max(sigma.v_dacosta.abs());
        d8.push((sigma.v_paper8 - sigma.v_dacosta).abs());
        d7.push((sigma.v_paper7 - sigma.v_dacosta).abs());
        dc.push(sigma.corrected_residual);
        gauss_claim.push((curv.gauss - normal.grad_n_sq).abs());
        minimal &= normal.div_n.abs() <= 1e-12 * curvature_scale;
    }

    let floor = 1e-12 * units.kinetic_scale() * curvature_scale;
    Ok(DiscrepancyReport {
        samples: samples.len(),
        max_abs_v_dacosta: max_vd,
        paper8: stat(&d8, max_vd, floor),
        paper7: stat(&d7, max_vd, floor),
        corrected: stat(&dc, max_vd, floor),
        minimal_surface: minimal && !samples.is_empty(),
        minimal_gauss_claim: minimal.then(|| stat(&gauss_claim, 0.0, f64::INFINITY)),
    })
}
