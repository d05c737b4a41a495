//! Channel sweep, bound-state counting and refinement metadata.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::discrete::{discretize_1d, discretize_weighted, DiscreteOperator};
use super::eigen::{eigen_below, eigen_lowest};
use super::meridian::{reduce_with_map, ArclengthMap, Boundary};
use super::{Discretization, PotentialSelector, SpectralProblem};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpectrum {
    pub ell: u32,
    pub degeneracy: usize,
    /// Lowest eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues below the bound-state threshold.
    pub bound: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefinementLevel {
    pub points: usize,
    pub truncation: Option<f64>,
    pub step: f64,
    pub threshold: f64,
    pub bound_count: usize,
    pub ground_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceMeta {
    /// `(N, T)`, `(2N, T)`, `(N, 2T)`, `(2N, 2T)`; only the first two for compact surfaces.
    pub levels: Vec<RefinementLevel>,
    /// `E(2N) + (E(2N) - E(N)) / 3` for the ground state.
    pub richardson_ground: Option<f64>,
    pub richardson_error: Option<f64>,
    /// `E(N, 2T) - E(N, T)` for the ground state.
    pub truncation_shift: Option<f64>,
    /// Every bound level at `(2N, 2T)` lies at or below its `(N, T)` counterpart.
    pub monotone_in_truncation: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralResult {
    pub surface: String,
    pub potential: PotentialSelector,
    pub discretization: Discretization,
    pub points: usize,
    pub truncation: Option<f64>,
    pub step: f64,
    pub threshold: f64,
    pub channels: Vec<ChannelSpectrum>,
    /// Bound states with multiplicity at `(N, T)`.
    pub bound_count: usize,
    /// Smallest and largest count over all refinement levels.
    pub bound_count_range: [usize; 2],
    pub converged: bool,
    /// The sweep stopped at `ell_max` while channels were still binding.
    pub ell_cap_reached: bool,
    pub ground_energy: Option<f64>,
    pub convergence: ConvergenceMeta,
}

/// Discretizes channel `ell` of `problem` with `points` nominal nodes.
pub fn channel_operator(problem: &SpectralProblem, ell: u32, points: usize) -> Result<(DiscreteOperator, Discretization)> {
    let reach = problem.truncation.unwrap_or(0.0) * 2.0 + problem.chart.length_scale();
    let map = Arc::new(ArclengthMap::new(&problem.chart, reach));
    channel_with_map(problem, ell, points, map)
}

fn channel_with_map(
    problem: &SpectralProblem,
    ell: u32,
    points: usize,
    map: Arc<ArclengthMap>,
) -> Result<(DiscreteOperator, Discretization)> {
    if !problem.chart.periodic_u() {
        return Err(Error::NotAxisymmetric(problem.chart.name().to_owned()));
    }
    let red = reduce_with_map(problem, ell, map)?;
    match problem.discretization {
        Discretization::Weighted => Ok((discretize_weighted(&red.weighted_system(), points)?, Discretization::Weighted)),
        Discretization::Liouville => {
            let flat = red.flat_system().ok_or_else(|| {
                Error::SpectralResolution(format!(
                    "{} has a pole on its meridian; the flat form is not available",
                    problem.chart.name()
                ))
            })?;
            Ok((discretize_1d(&flat, points)?, Discretization::Liouville))
        }
        Discretization::Auto => match red.flat_system() {
            Some(flat) => Ok((discretize_1d(&flat, points)?, Discretization::Liouville)),
            None => Ok((discretize_weighted(&red.weighted_system(), points)?, Discretization::Weighted)),
        },
    }
}

struct LevelOutcome {
    level: RefinementLevel,
    channels: Vec<ChannelSpectrum>,
    cap_reached: bool,
    route: Discretization,
}

fn threshold(problem: &SpectralProblem, op: &DiscreteOperator) -> f64 {
    let d = op.grid.domain;
    if d.left == Boundary::Dirichlet || d.right == Boundary::Dirichlet {
        // below the ground state of a free box of the same width
        let width = d.hi - d.lo;
        -problem.units.kinetic_scale() * (PI / width).powi(2)
    } else {
        -1e-12 * op.matrix.norm_bound()
    }
}

fn sweep(problem: &SpectralProblem, points: usize, truncation: Option<f64>) -> Result<LevelOutcome> {
    let mut problem = problem.clone();
    problem.truncation = truncation;
    let reach = truncation.unwrap_or(0.0) * 2.0 + problem.chart.length_scale();
    let map = Arc::new(ArclengthMap::new(&problem.chart, reach));
    let mut channels = Vec::new();
    let mut empty_run = 0;
    let mut thr = None;
    let mut step = 0.0;
    let mut route = Discretization::Auto;
    let mut cap_reached = false;
    for ell in 0..=problem.ell_max {
        let (op, r) = channel_with_map(&problem, ell, points, map.clone())?;
        route = r;
        step = op.grid.step;
        let t = *thr.get_or_insert_with(|| threshold(&problem, &op));
        let bound = eigen_below(&op.matrix, t)?;
        let keep = (bound.len() + problem.levels).min(op.matrix.len());
        let eigenvalues = eigen_lowest(&op.matrix, keep)?;
        empty_run = if bound.is_empty() { empty_run + 1 } else { 0 };
        let binding = !bound.is_empty();
        channels.push(ChannelSpectrum {
            ell,
            degeneracy: SpectralProblem::degeneracy(ell),
            eigenvalues,
            bound,
        });
        if empty_run >= 2 && ell >= problem.ell_min {
            break;
        }
        if ell == problem.ell_max && binding {
            cap_reached = true;
        }
    }
    let bound_count = channels.iter().map(|c| c.bound.len() * c.degeneracy).sum();
    let ground_energy = channels
        .iter()
        .filter_map(|c| c.eigenvalues.first().copied())
        .min_by(f64::total_cmp);
    Ok(LevelOutcome {
        level: RefinementLevel {
            points,
            truncation,
            step,
            threshold: thr.unwrap_or(0.0),
            bound_count,
            ground_energy,
        },
        channels,
        cap_reached,
        route,
    })
}

/// Sweeps angular-momentum channels and counts states below the continuum threshold.
///
/// Open surfaces use the threshold `-(hbar^2/2m)(pi/L)^2` of a free box as wide as the
/// window; compact surfaces count strictly negative eigenvalues. The count is repeated
/// at doubled resolution and doubled window and reported as converged only when all
/// refinements agree.
pub fn count_bound_states(problem: &SpectralProblem) -> Result<SpectralResult> {
    let n = problem.points;
    let compact = problem.chart.is_compact();
    let t = if compact {
        None
    } else {
        match problem.truncation {
            Some(t) if t.is_finite() && t > 0.0 => Some(t),
            Some(t) => return Err(Error::InvalidTruncation(t)),
            None => return Err(Error::MissingTruncation(problem.chart.name().to_owned())),
        }
    };
    let plan: Vec<(usize, Option<f64>)> = match t {
        None => vec![(n, None), (2 * n, None)],
        Some(t) => vec![(n, Some(t)), (2 * n, Some(t)), (n, Some(2.0 * t)), (2 * n, Some(2.0 * t))],
    };
    let outcomes: Vec<LevelOutcome> = plan
        .par_iter()
        .map(|&(points, trunc)| sweep(problem, points, trunc))
        .collect::<Result<_>>()?;
    let base = &outcomes[0];
    let counts: Vec<usize> = outcomes.iter().map(|o| o.level.bound_count).collect();
    let lo = *counts.iter().min().unwrap();
    let hi = *counts.iter().max().unwrap();

    let (richardson_ground, richardson_error) = match (base.level.ground_energy, outcomes[1].level.ground_energy) {
        (Some(e1), Some(e2)) => (Some(e2 + (e2 - e1) / 3.0), Some((e2 - e1).abs() / 3.0)),
        _ => (None, None),
    };
    let (truncation_shift, monotone_in_truncation) = if outcomes.len() == 4 {
        let shift = match (base.level.ground_energy, outcomes[2].level.ground_energy) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        };
        let wide = &outcomes[3];
        let monotone = base.channels.iter().all(|c| {
            let Some(w) = wide.channels.iter().find(|w| w.ell == c.ell) else {
                return c.bound.is_empty();
            };
            c.bound
                .iter()
                .zip(&w.eigenvalues)
                .all(|(a, b)| *b <= a + 1e-9 * a.abs().max(problem.units.kinetic_scale()))
        });
        (shift, Some(monotone))
    } else {
        (None, None)
    };

    Ok(SpectralResult {
        surface: problem.chart.name().to_owned(),
        potential: problem.potential,
        discretization: base.route,
        points: n,
        truncation: t,
        step: base.level.step,
        threshold: base.level.threshold,
        channels: base.channels.clone(),
        bound_count: base.level.bound_count,
        bound_count_range: [lo, hi],
        converged: lo == hi,
        ell_cap_reached: outcomes.iter().any(|o| o.cap_reached),
        ground_energy: base.level.ground_energy,
        convergence: ConvergenceMeta {
            levels: outcomes.iter().map(|o| o.level.clone()).collect(),
            richardson_ground,
            richardson_error,
            truncation_shift,
            monotone_in_truncation,
        },
    })
}
