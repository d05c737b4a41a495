//! Full 2D discretization of the surface Hamiltonian in chart coordinates, used to
//! cross-check the channel decomposition.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::meridian::{ArclengthMap, Boundary, MeridianDomain, MeridianGrid};
use super::solver::channel_operator;
use super::sparse::{lowest_eigenpairs, CsrMatrix};
use super::{eigen_lowest, PotentialSelector, SpectralProblem};
use crate::potential::evaluate_point;
use crate::surface::{MeridianEnd, SurfaceChart};
use crate::topo::Resolution;
use crate::{Error, Result};

/// The symmetrized operator `k M^{-1/2} K M^{-1/2} + V` on a chart grid.
#[derive(Debug, Clone)]
pub struct Operator2d {
    pub matrix: CsrMatrix,
    pub u_nodes: Vec<f64>,
    pub v_nodes: Vec<f64>,
    pub potential: Vec<f64>,
}

fn metric(chart: &SurfaceChart, u: f64, v: f64) -> Result<(f64, f64, f64)> {
    let p = chart.evaluate(u, v)?;
    Ok((p.d_u.dot(&p.d_u), p.d_u.dot(&p.d_v), p.d_v.dot(&p.d_v)))
}

fn v_window(problem: &SpectralProblem) -> Result<MeridianDomain> {
    let chart = &problem.chart;
    let dom = chart.v_domain();
    let (left, right) = chart.meridian_ends();
    let t = || match problem.truncation {
        Some(t) if t.is_finite() && t > 0.0 => Ok(t),
        Some(t) => Err(Error::InvalidTruncation(t)),
        None => Err(Error::MissingTruncation(chart.name().to_owned())),
    };
    let map = || ArclengthMap::new(chart, 2.0 * problem.truncation.unwrap_or(0.0) + chart.length_scale());
    let b = |e| match e {
        MeridianEnd::Pole => Boundary::Pole,
        MeridianEnd::Open => Boundary::Dirichlet,
        MeridianEnd::Periodic => Boundary::Periodic,
    };
    let (lo, hi) = match (left, right) {
        (MeridianEnd::Periodic, _) => (dom.lo, dom.lo + TAU),
        (MeridianEnd::Open, MeridianEnd::Open) => {
            let m = map();
            (m.parameter(-t()?), m.parameter(t()?))
        }
        (MeridianEnd::Pole, MeridianEnd::Open) => (dom.lo, map().parameter(t()?)),
        (MeridianEnd::Open, MeridianEnd::Pole) => (map().parameter(-t()?), dom.hi),
        _ => (dom.lo, dom.hi),
    };
    Ok(MeridianDomain {
        lo,
        hi,
        left: b(left),
        right: b(right),
    })
}

/// Assembles the 2D operator. The chart must be orthogonal (`F = 0`) and periodic in `u`.
pub fn assemble_2d(problem: &SpectralProblem, resolution: Resolution) -> Result<Operator2d> {
    let chart = &problem.chart;
    if !chart.periodic_u() {
        return Err(Error::NotAxisymmetric(chart.name().to_owned()));
    }
    let (nu, nv) = (resolution.nu, resolution.nv);
    let hu = TAU / nu as f64;
    let u_nodes: Vec<f64> = (0..nu).map(|i| i as f64 * hu).collect();
    let vgrid = MeridianGrid::new(v_window(problem)?, nv);
    let hv = vgrid.step;
    let v_nodes = vgrid.nodes.clone();
    let m = v_nodes.len();
    let dom = vgrid.domain;
    let idx = |i: usize, j: usize| j * nu + i;
    let kin = problem.units.kinetic_scale();

    let check = |e: f64, f: f64, g: f64| -> Result<()> {
        if f.abs() > 1e-10 * (e * g).sqrt() {
            return Err(Error::NonOrthogonalChart(chart.name().to_owned()));
        }
        Ok(())
    };
    let mut mass = vec![0.0; nu * m];
    let mut potential = vec![0.0; nu * m];
    let mut stiff: Vec<(usize, usize, f64)> = Vec::with_capacity(5 * nu * m);
    let mut diag = vec![0.0; nu * m];
    for (j, &v) in v_nodes.iter().enumerate() {
        for (i, &u) in u_nodes.iter().enumerate() {
            let (e, f, g) = metric(chart, u, v)?;
            check(e, f, g)?;
            mass[idx(i, j)] = (e * g - f * f).sqrt() * hu * hv;
            potential[idx(i, j)] = match problem.potential {
                PotentialSelector::None => 0.0,
                sel => {
                    let (_, _, d) = evaluate_point(chart, u, v, &problem.units)?;
                    if sel == PotentialSelector::Dacosta {
                        d.v_dacosta
                    } else {
                        d.v_paper8
                    }
                }
            };
            // u-face between (i, j) and (i+1, j)
            let (e, f, g) = metric(chart, u + 0.5 * hu, v)?;
            check(e, f, g)?;
            let c = (g / e).sqrt() * hv / hu;
            let (a, b) = (idx(i, j), idx((i + 1) % nu, j));
            diag[a] += c;
            diag[b] += c;
            stiff.push((a, b, -c));
            stiff.push((b, a, -c));
        }
    }
    let v_face = |i: usize, vf: f64| -> Result<f64> {
        let (e, f, g) = metric(chart, u_nodes[i], vf)?;
        check(e, f, g)?;
        Ok((e / g).sqrt() * hu / hv)
    };
    for j in 0..m {
        let last = j + 1 == m;
        for i in 0..nu {
            let a = idx(i, j);
            if !last {
                let c = v_face(i, v_nodes[j] + 0.5 * hv)?;
                let b = idx(i, j + 1);
                diag[a] += c;
                diag[b] += c;
                stiff.push((a, b, -c));
                stiff.push((b, a, -c));
            } else {
                match dom.right {
                    Boundary::Dirichlet => diag[a] += v_face(i, v_nodes[j] + 0.5 * hv)?,
                    Boundary::Periodic => {
                        let c = v_face(i, v_nodes[j] + 0.5 * hv)?;
                        let b = idx(i, 0);
                        diag[a] += c;
                        diag[b] += c;
                        stiff.push((a, b, -c));
                        stiff.push((b, a, -c));
                    }
                    Boundary::Pole => {}
                }
            }
            if j == 0 && dom.left == Boundary::Dirichlet {
                diag[a] += v_face(i, v_nodes[0] - 0.5 * hv)?;
            }
        }
    }
    for (a, d) in diag.iter().enumerate() {
        stiff.push((a, a, *d));
    }
    let entries = stiff
        .into_iter()
        .map(|(a, b, c)| {
            let mut val = kin * c / (mass[a] * mass[b]).sqrt();
            if a == b {
                val += potential[a];
            }
            (a, b, val)
        })
        .collect();
    Ok(Operator2d {
        matrix: CsrMatrix::from_triplets(nu * m, entries),
        u_nodes,
        v_nodes,
        potential,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossCheck2d {
    pub resolution: Resolution,
    /// Richardson-extrapolated levels from the channel solver, with multiplicity.
    pub levels_1d: Vec<f64>,
    pub levels_2d: Vec<f64>,
    pub errors_1d: Vec<f64>,
    pub errors_2d: Vec<f64>,
    pub max_deviation: f64,
    pub max_allowed: f64,
    pub agree: bool,
}

fn channel_levels(problem: &SpectralProblem, k: usize, points: usize) -> Result<Vec<f64>> {
    let mut levels: Vec<f64> = Vec::new();
    for ell in 0..=problem.ell_max {
        let (op, _) = channel_operator(problem, ell, points)?;
        let ev = eigen_lowest(&op.matrix, k.min(op.matrix.len()))?;
        if levels.len() >= k && ev[0] > levels[k - 1] {
            break;
        }
        for e in ev {
            levels.extend(std::iter::repeat_n(e, SpectralProblem::degeneracy(ell)));
        }
        levels.sort_by(f64::total_cmp);
        levels.truncate(k);
    }
    Ok(levels)
}

fn extrapolate(coarse: &[f64], fine: &[f64]) -> (Vec<f64>, Vec<f64>) {
    coarse
        .iter()
        .zip(fine)
        .map(|(a, b)| (b + (b - a) / 3.0, (b - a).abs() / 3.0))
        .unzip()
}

/// Compares the `k` lowest levels of the channel solver with the 2D operator, each
/// extrapolated from two resolutions. Agreement means every level differs by less
/// than ten times the larger of the two discretization-error estimates.
pub fn cross_check_2d(problem: &SpectralProblem, k: usize, resolution: Resolution) -> Result<CrossCheck2d> {
    let fine_res = Resolution {
        nu: 2 * resolution.nu,
        nv: 2 * resolution.nv,
    };
    let shift = |op: &Operator2d| {
        op.potential.iter().copied().fold(f64::INFINITY, f64::min)
            - problem.units.kinetic_scale() / problem.chart.length_scale().powi(2)
    };
    let coarse = assemble_2d(problem, resolution)?;
    let fine = assemble_2d(problem, fine_res)?;
    let e2c = lowest_eigenpairs(&coarse.matrix, k, shift(&coarse), 11)?.values;
    let e2f = lowest_eigenpairs(&fine.matrix, k, shift(&fine), 11)?.values;
    let e1c = channel_levels(problem, k, resolution.nv)?;
    let e1f = channel_levels(problem, k, fine_res.nv)?;
    let (levels_1d, errors_1d) = extrapolate(&e1c, &e1f);
    let (levels_2d, errors_2d) = extrapolate(&e2c, &e2f);
    let mut max_deviation = 0.0f64;
    let mut max_allowed = f64::INFINITY;
    let mut agree = levels_1d.len() == levels_2d.len();
    let floor = 1e-9 * problem.units.kinetic_scale() / problem.chart.length_scale().powi(2);
    for i in 0..levels_1d.len().min(levels_2d.len()) {
        let dev = (levels_1d[i] - levels_2d[i]).abs();
        let allowed = 10.0 * errors_1d[i].max(errors_2d[i]) + floor;
        max_deviation = max_deviation.max(dev);
        max_allowed = max_allowed.min(allowed);
        agree &= dev <= allowed;
    }
    Ok(CrossCheck2d {
        resolution,
        levels_1d,
        levels_2d,
        errors_1d,
        errors_2d,
        max_deviation,
        max_allowed,
        agree,
    })
}
